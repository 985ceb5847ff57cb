#include "clab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return clab::run_cli(argc, argv, std::cout, std::cerr); }
