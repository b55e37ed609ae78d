#include <iostream>

#include "phasequant/cli.hpp"

int main(int argc, char** argv) { return phasequant::cli::run(argc, argv, std::cout, std::cerr); }
