#pragma once

#include <iosfwd>

namespace finiten::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRejected = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `finiten` binary; streams are injectable for tests.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace finiten::cli
