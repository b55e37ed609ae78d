#pragma once

#include <iosfwd>

namespace phasequant::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Entry point of the `phasequant` tool; `out` receives documents written to
/// stdout, `err` error records.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phasequant::cli
