#include <string>
#include <vector>

#include "discfdr/cli.hpp"

int main(int argc, char** argv) {
  return discfdr::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
