#include <iostream>

#include "camp/cli/commands.hpp"

int main(int argc, char** argv) {
  return camp::cli::run_cli(argc, argv, std::cout, std::cerr);
}
