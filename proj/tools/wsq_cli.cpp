#include <iostream>

#include "wsq/cli.hpp"

int main(int argc, char** argv) {
  return wsq::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
