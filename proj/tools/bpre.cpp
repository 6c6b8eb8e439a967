#include <iostream>

#include "cli.h"

auto main(int argc, char** argv) -> int {
  auto args = std::vector<std::string>(argv + 1, argv + argc);
  return bpre::cli::run(args, std::cout, std::cerr);
}
