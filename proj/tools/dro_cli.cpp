#include <iostream>
#include <string>
#include <vector>

#include "dro/report.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return dro::run(args, std::cout, std::cerr);
}
