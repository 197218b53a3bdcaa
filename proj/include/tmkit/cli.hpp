#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tmkit {

struct CliEnvironment {
  bool color = false;  // ANSI colour in diagnostics
};

/// Runs one `tmkit` invocation. `args` excludes the program name.
/// Returns 0 on success, 1 when diagnostics or errors were reported and 2 on
/// a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, CliEnvironment env = {});

}  // namespace tmkit
