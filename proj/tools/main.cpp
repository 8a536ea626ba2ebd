#include <iostream>

#include "wmcusum/cli.hpp"

int main(int argc, char** argv) { return wmcusum::run_cli(argc, argv, std::cout, std::cerr); }
