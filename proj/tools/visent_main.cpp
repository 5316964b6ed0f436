#include <iostream>

#include "visent/cli.hpp"

int main(int argc, char** argv) {
  return visent::cli::run_cli(argc, argv, std::cout, std::cerr);
}
