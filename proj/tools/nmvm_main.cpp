#include <iostream>

#include "nmvm/cli.hpp"

int main(int argc, char** argv) { return nmvm::cli::run(argc, argv, std::cout, std::cerr); }
