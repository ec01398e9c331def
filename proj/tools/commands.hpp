#pragma once

#include <iosfwd>
#include <string>

namespace condepth::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable holding the default --seed.
inline constexpr const char* kSeedVariable = "CONDEPTH_SEED";

/// Runs one command line; returns the process exit code
/// (0 success, 2 input error, 3 numerical error, 1 anything else).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Fixed report formatting: 6 significant digits.
std::string fmt6(double v);

}  // namespace condepth::cli
