#include "rbqkd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rbqkd::cli::dispatch(argc, argv, std::cout, std::cerr); }
