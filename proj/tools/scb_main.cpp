#include <iostream>
#include <string>
#include <vector>

#include "scb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return scb::run_cli(args, std::cout, std::cerr);
}
