#include <iostream>
#include <string>
#include <vector>

#include "quadforge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return quadforge::cli::run(args, std::cout, std::cerr);
}
