#include <iostream>

#include "rdmc/cli.hpp"

int main(int argc, char** argv) {
  return rdmc::cli::main_entry(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
