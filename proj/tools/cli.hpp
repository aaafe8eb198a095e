#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oppaths::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // replay mismatch, oracle mismatch, other
inline constexpr int kExitUsage = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kExitSampling = 4;

// Default edge probability per dimension (d = 1, 2, 3), from the survival
// calibration of calibrate_default_p at seed 2024.
double default_p(int d);

// Runs one command line (without the program name). Results go to `out`,
// error records (one JSON object per line) to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oppaths::cli
