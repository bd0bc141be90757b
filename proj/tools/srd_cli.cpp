#include <iostream>
#include <string>
#include <vector>

#include "srd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return srd::run_cli(args, std::cerr);
}
