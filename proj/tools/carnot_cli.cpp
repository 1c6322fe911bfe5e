#include "carnot/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return carnot::cli::run(argc, argv, std::cout, std::cerr); }
