#include <iostream>

#include "bures/cli.hpp"

int main(int argc, char** argv) {
  return bures::cli::run(argc, argv, std::cout, std::cerr);
}
