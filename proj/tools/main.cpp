#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return qsdc::cli::run(argc, argv, std::cout, std::cerr); }
