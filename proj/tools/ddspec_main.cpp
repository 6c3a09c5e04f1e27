#include "ddspec/cli_workbench.hpp"

#include <iostream>

int main(int argc, char** argv) { return ddspec::run_cli(argc, argv, std::cout, std::cerr); }
