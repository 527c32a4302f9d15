#include <iostream>

#include "predbs/cli.hpp"

int main(int argc, char** argv) { return predbs::cli::run(argc, argv, std::cout, std::cerr); }
