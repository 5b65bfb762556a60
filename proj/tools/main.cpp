#include <iostream>

#include "credo/cli.hpp"

int main(int argc, char** argv) {
  return credo::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
