#include <iostream>

#include "tvarx/cli.hpp"

int main(int argc, char** argv) { return tvarx::cli::run(argc, argv, std::cout, std::cerr); }
