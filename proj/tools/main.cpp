#include <iostream>

#include "taylornet/cli.hpp"

int main(int argc, char** argv) { return taylornet::run_cli(argc, argv, std::cout, std::cerr); }
