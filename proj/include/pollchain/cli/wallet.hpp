#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pollchain::cli {

/// 0 success, 1 the node rejected the request or was unreachable, 2 local
/// validation, usage or file error.
enum ExitCode : int { kExitOk = 0, kExitServer = 1, kExitLocal = 2 };

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Entry point of the wallet CLI; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env);

}  // namespace pollchain::cli
