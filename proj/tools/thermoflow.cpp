#include <iostream>

#include "thermoflow_cli.hpp"

int main(int argc, char** argv) { return thermoflow::cli::run(argc, argv, std::cout, std::cerr); }
