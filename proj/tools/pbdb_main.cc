#include <iostream>
#include <string>
#include <vector>

#include "pbdb/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pbdb::cli::run(args, std::cout, std::cerr);
}
