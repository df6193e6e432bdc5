#include <iostream>

#include "accsim/cli.hpp"

int main(int argc, char** argv) { return accsim::run_cli(argc, argv, std::cout, std::cerr); }
