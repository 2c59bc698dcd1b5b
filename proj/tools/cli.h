#pragma once

#include <ostream>

namespace nesc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nesc::cli
