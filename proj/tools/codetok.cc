#include <iostream>

#include "codetok/cli.h"

int main(int argc, char** argv) {
  return codetok::RunCli(argc, argv, std::cout, std::cerr);
}
