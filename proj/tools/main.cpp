#include <vector>

#include "smen/cli.hpp"

int main(int argc, char** argv) {
  return smen::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
