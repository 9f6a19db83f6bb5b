#include <iostream>

#include "siwalk_cli/cli.hpp"

int main(int argc, char** argv) { return siwalk::cli::run_cli(argc, argv, std::cout, std::cerr); }
