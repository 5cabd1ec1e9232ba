#include <string>
#include <vector>

#include "sweetspot/cli.hpp"

int main(int argc, char** argv) {
  return sweetspot::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
