#include <iostream>

#include "vshift/cli.h"

int main(int argc, char** argv) {
  return vshift::cli::Run(argc, argv, std::cout, std::cerr);
}
