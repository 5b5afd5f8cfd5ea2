#include <iostream>
#include <string>
#include <vector>

#include "tac/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tac::run_command(std::move(args), std::cout, std::cerr);
}
