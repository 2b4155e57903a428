// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace ipact::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

/// Entry point of the `ipact` tool. Never throws; returns the process exit code.
int run(int argc, const char* const* argv);
/// Same, with arguments excluding the program name.
int run(const std::vector<std::string>& args);

}  // namespace ipact::cli
