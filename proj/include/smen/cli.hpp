#pragma once

#include <string>
#include <vector>

namespace smen {

/// Parse and run one subcommand. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace smen
