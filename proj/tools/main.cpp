#include <iostream>

#include "hydro/cli.hpp"

int main(int argc, char** argv) { return hydro::cli::run(argc, argv, std::cout, std::cerr); }
