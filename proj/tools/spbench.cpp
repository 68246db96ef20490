#include <iostream>

#include "spbench/harness.hpp"

int main(int argc, char** argv)
{
    return spbench::run_cli(argc, argv, std::cout, std::cerr);
}
