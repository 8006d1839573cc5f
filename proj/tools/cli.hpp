#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hybridnet::cli {

/// Environment variable naming the default output format ("csv" or "json").
inline constexpr const char* kFormatEnv = "HYBRIDNET_FORMAT";

/// Runs one invocation. `args` excludes the program name. Data goes to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on a runtime or domain
/// error and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hybridnet::cli
