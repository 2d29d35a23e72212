#include <iostream>

#include "dml_cli/commands.hpp"

int main(int argc, char** argv) { return dml::cli::run_cli(argc, argv, std::cout, std::cerr); }
