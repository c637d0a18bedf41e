#include <iostream>
#include <string>
#include <vector>

#include "deepdc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return deepdc::run_cli(args, std::cout, std::cerr);
}
