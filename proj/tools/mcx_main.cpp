#include <string>
#include <vector>

#include "mcx/cli.hpp"

extern char** environ;

int main(int argc, char** argv) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) env.emplace_back(*e);
  return mcx::cli_main(argc, argv, env);
}
