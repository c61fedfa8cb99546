#include <iostream>

#include "quadland/cli.hpp"

int main(int argc, char** argv) { return quadland::cli::run(argc, argv, std::cout, std::cerr); }
