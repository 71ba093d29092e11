#include "mixdeconv/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return mixdeconv::run_cli(argc, argv, std::cout, std::cerr);
}
