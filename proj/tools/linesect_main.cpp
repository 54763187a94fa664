#include <iostream>

#include "linesect/cli.hpp"

int main(int argc, char** argv) {
  return linesect::cli::run(argc, argv, std::cout, std::cerr);
}
