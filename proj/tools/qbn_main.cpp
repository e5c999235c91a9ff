#include <iostream>
#include <string>
#include <vector>

#include "qbn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qbn::run_cli(args, std::cout, std::cerr);
}
