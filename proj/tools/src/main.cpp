#include <iostream>

#include "priorimpact/cli.hpp"

int main(int argc, char** argv) { return priorimpact::cli::run(argc, argv, std::cout, std::cerr); }
