#include <iostream>

#include "wtc/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wtc::run_cli(args, std::cout, std::cerr);
}
