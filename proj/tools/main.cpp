#include <iostream>

#include "lgdp/cli.hpp"

int main(int argc, char** argv) { return lgdp::run_cli(argc, argv, std::cout, std::cerr); }
