#include <iostream>

#include "affordance/cli.hpp"

int main(int argc, char** argv) { return affordance::cli::run(argc, argv, std::cout, std::cerr); }
