#include "ifsconj/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ifsconj::run_cli(argc, argv, std::cout, std::cerr); }
