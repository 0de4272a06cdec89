#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qwit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

/// Environment variable overriding the default --seed.
inline constexpr const char* kSeedEnv = "QWIT_SEED";

/// Runs one command line (without the program name). Output goes to `out`
/// unless --output is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwit::cli
