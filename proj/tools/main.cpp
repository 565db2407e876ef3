#include <vector>

#include "rollcard/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rollcard::cli::run(args);
}
