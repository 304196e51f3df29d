#include "hybrid/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hybrid::run_cli(argc, argv, std::cout, std::cerr); }
