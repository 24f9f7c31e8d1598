#pragma once

// Command-line surface. Exit codes: 0 affirmative verdict, 1 negative verdict,
// 2 error or undecided. Certificates go to `out`, diagnostics to `err`.

#include <ostream>
#include <string>
#include <vector>

namespace wsq {

inline constexpr int exit_affirmative = 0;
inline constexpr int exit_negative = 1;
inline constexpr int exit_error = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsq
