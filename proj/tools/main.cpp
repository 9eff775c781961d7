#include <string>
#include <vector>

#include "polypin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return polypin::cli::run(std::move(args));
}
