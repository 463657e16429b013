#include <iostream>

#include "histcheck/cli.hpp"

int main(int argc, char** argv) { return histcheck::cli::run(argc, argv, std::cout, std::cerr); }
