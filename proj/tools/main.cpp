#include "levelgraph/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lg::run_cli(argc, argv, std::cout, std::cerr); }
