#include <iostream>
#include <string>
#include <vector>

#include "pathfollow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pathfollow::cli_main(args, std::cout, std::cerr);
}
