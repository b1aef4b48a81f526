#include <iostream>

#include "gstim/cli.hpp"

int main(int argc, char** argv) { return gstim::run_cli(argc, argv, std::cout, std::cerr); }
