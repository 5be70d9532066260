#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pw {

inline constexpr int kExitPass = 0, kExitFail = 1, kExitUsage = 2;

// Output directory override, used when --out is not given.
inline constexpr const char* kOutEnv = "PIVOTWALK_OUT";

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pw
