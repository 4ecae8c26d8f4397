#include <iostream>

#include "plume/cli.hpp"

int main(int argc, char** argv) {
  return plume::run_cli(argc, argv, std::cout, std::cerr);
}
