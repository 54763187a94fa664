#pragma once

#include <ostream>

namespace linesect::cli {

enum ExitCode : int { ok = 0, input_error = 1, numerical_error = 2 };

/// Entry point of the `linesect` tool: subcommands intersect, implicitize
/// and sample.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace linesect::cli
