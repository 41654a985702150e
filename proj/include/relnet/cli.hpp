#pragma once

namespace relnet::cli {

/// Exit codes: 0 success, 1 runtime or input error, 2 usage or unwritable
/// output, 3 classifier call budget exhausted.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBudget = 3;

int run(int argc, char** argv);

}  // namespace relnet::cli
