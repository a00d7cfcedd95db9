#include <iostream>
#include <string>
#include <vector>

#include "lrpca_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lrpca::cli::Run(args, std::cout, std::cerr);
}
