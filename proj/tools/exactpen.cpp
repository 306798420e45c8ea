#include <iostream>
#include <string>
#include <vector>

#include "exactpen_commands.hpp"

int main(int argc, char** argv) {
  return exactpen::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
