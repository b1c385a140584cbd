#include <iostream>

#include "cslope/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cslope::run(args, std::cout, std::cerr);
}
