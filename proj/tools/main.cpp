#include <iostream>
#include <string>
#include <vector>

#include "tableforge/app/cli.hpp"

int main(int argc, char** argv) {
  return tableforge::app::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
