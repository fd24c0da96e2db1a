#include <iostream>

#include "recoil/cli.hpp"

int main(int argc, char** argv) { return recoil::run_cli(argc, argv, std::cout, std::cerr); }
