#include <iostream>

#include "cmu/cli.hpp"

int main(int argc, char** argv) { return cmu::run_cli(argc, argv, std::cout, std::cerr); }
