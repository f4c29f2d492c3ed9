#include <string>
#include <vector>

#include "fracheat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fracheat::parse_and_dispatch(args);
}
