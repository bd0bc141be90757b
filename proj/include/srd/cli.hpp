#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace srd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 1;

// Runs the command line (args[0] is the program name). Errors go to diag.
// Outputs are written only after the whole experiment succeeded.
int run_cli(const std::vector<std::string>& args, std::ostream& diag);

}  // namespace srd
