#include <iostream>

#include "qolat_cli/commands.hpp"

int main(int argc, char** argv) { return qolat::cli::run_cli(argc, argv, std::cout, std::cerr); }
