#include <iostream>

#include "isgns/cli.hpp"

int main(int argc, char** argv) { return isgns::cli::run(argc, argv, std::cout, std::cerr); }
