#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return aquaclear::cli::run_cli(argc, argv, std::cerr); }
