#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "idq/errors.hpp"

namespace idq::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// 3 for numerical failures, 2 for everything else.
int exit_code(ErrorKind kind);

/// Runs one subcommand. `args` excludes the program name. Results go to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace idq::cli
