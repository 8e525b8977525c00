#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace selfish::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagError = 2;
inline constexpr int kExitNumericFailure = 3;

inline constexpr const char* kToolVersion = "1.0.0";

/// Runs one invocation; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace selfish::cli
