#include <iostream>

#include "rndrace/cli.hpp"

int main(int argc, char** argv) { return rndrace::run_cli(argc, argv, std::cout, std::cerr); }
