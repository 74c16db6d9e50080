#include <iostream>

#include "plgrim/cli.hpp"

int main(int argc, char** argv) { return plgrim::run_cli(argc, argv, std::cout, std::cerr); }
