#include <iostream>
#include <string>
#include <vector>

#include "whyqa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return whyqa::cli::run(args, std::cout, std::cerr);
}
