#include <iostream>

#include "flumn/cli.hpp"

int main(int argc, char** argv) {
  return flumn::run_cli(argc, argv, std::cout, std::cerr);
}
