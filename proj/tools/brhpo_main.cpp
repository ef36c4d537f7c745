#include <iostream>
#include <string>
#include <vector>

#include "hrl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hrl::harness::run_command(args, std::cout, std::cerr);
}
