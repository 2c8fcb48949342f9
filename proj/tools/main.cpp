#include <iostream>
#include <string>
#include <vector>

#include "cmcepi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cmcepi::run_cli(args, std::cout, std::cerr);
}
