#include <iostream>

#include "infodesign/commands.hpp"

int main(int argc, char** argv) {
  return infodesign::run_cli(argc, argv, std::cout, std::cerr);
}
