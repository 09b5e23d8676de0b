#include "cvqft/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cvqft::run_cli(argc, argv, std::cout, std::cerr); }
