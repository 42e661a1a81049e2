#pragma once

#include <iosfwd>

namespace fbmlt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Parses and dispatches one subcommand. Results go to `out` unless an output
/// file is named; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbmlt::cli
