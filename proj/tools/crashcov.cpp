#include <iostream>

#include "crashcov/cli.hpp"

int main(int argc, char** argv) {
  return crashcov::cli::run(argc, argv, std::cout, std::cerr);
}
