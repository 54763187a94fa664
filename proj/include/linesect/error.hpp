#pragma once

#include <stdexcept>
#include <string>

namespace linesect {

enum class ErrorKind {
  invalid_input,
  ill_posed_basis,
  degenerate_geometry,
  shape_mismatch,
  insufficient_family,
  ambiguous_preimage,
  unresolved_multiplicity,
  infinite_intersections,
};

const char* to_string(ErrorKind kind) noexcept;

// Input errors originate from what the caller handed in; everything else is a
// failure inside one of the numerical stages.
constexpr bool is_input_error(ErrorKind kind) noexcept {
  return kind == ErrorKind::invalid_input || kind == ErrorKind::ill_posed_basis ||
         kind == ErrorKind::shape_mismatch;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace linesect
