#include <iostream>
#include <string>
#include <vector>

#include "layerlq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return layerlq::run_cli(args, std::cout, std::cerr);
}
