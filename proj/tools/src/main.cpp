#include <iostream>

#include "interfere_cli/cli.hpp"

int main(int argc, char** argv) { return interfere::cli::run(argc, argv, std::cout, std::cerr); }
