#include <cstdlib>
#include <iostream>
#include <string_view>

#include <unistd.h>

#include "tmkit/cli.hpp"

int main(int argc, char** argv) {
  tmkit::CliEnvironment env;
  const char* color = std::getenv("TM_COLOR");
  env.color = isatty(STDERR_FILENO) && !(color && std::string_view(color) == "0");
  return tmkit::run_cli({argv + 1, argv + argc}, std::cout, std::cerr, env);
}
