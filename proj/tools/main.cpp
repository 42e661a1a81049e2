#include "fbmlt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fbmlt::cli::run(argc, argv, std::cout, std::cerr); }
