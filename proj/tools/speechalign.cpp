#include <iostream>

#include "speechalign/cli/cli.hpp"

int main(int argc, char** argv) {
  return speechalign::cli::run(argc, argv, std::cout, std::cerr);
}
