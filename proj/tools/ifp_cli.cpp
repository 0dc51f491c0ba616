#include <iostream>

#include "ifp/cli.hpp"

int main(int argc, char** argv) { return ifp::cli::run(argc, argv, std::cout, std::cerr); }
