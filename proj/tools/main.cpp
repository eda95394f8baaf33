#include <iostream>

#include "glfr_cli.hpp"

int main(int argc, char** argv) { return glfr::cli::run(argc, argv, std::cout, std::cerr); }
