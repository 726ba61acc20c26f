#pragma once

#include <iosfwd>

namespace tinyad::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kBudget = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tinyad::cli
