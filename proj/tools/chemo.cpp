#include "chemo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return chemo::cli_main(argc, argv, std::cout, std::cerr); }
