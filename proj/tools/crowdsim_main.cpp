#include <iostream>

#include "crowdsim/cli.hpp"

int main(int argc, char** argv) { return crowdsim::cli::main(argc, argv, std::cout, std::cerr); }
