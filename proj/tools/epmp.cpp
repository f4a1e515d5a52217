#include <iostream>
#include <string>
#include <vector>

#include "epmp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return epmp::cli::run_cli(args, std::cout, std::cerr);
}
