#include <iostream>

#include "finiten/cli.hpp"

int main(int argc, char** argv) {
  return finiten::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
