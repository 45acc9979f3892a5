#include <iostream>

#include "kal/cli.hpp"

int main(int argc, char** argv) { return kal::cli_main(argc, argv, std::cout, std::cerr); }
