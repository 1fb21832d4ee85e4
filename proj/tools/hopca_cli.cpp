#include <iostream>

#include "hopca/cli.hpp"

int main(int argc, char** argv) {
  return hopca::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
