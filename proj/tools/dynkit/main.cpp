#include "dynkit/cli/run.hpp"

#include <iostream>

int main(int argc, char** argv) { return dynkit::cli::main_entry(argc, argv, std::cout, std::cerr); }
