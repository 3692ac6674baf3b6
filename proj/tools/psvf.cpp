#include <iostream>

#include "psvf/cli.hpp"

int main(int argc, char** argv) { return psvf::run_cli(argc, argv, std::cout, std::cerr); }
