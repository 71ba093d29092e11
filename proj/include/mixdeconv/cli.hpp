#pragma once

#include <ostream>
#include <string_view>

namespace mixdeconv {

inline constexpr std::string_view tool_name = "mixdeconv";
inline constexpr std::string_view tool_version = "1.0.0";

//! Entry point behind the mixdeconv executable: subcommands fit, npmle and
//! simulate. Returns the process exit code; 0 iff every requested output
//! was written, 2 for bad input or configuration, 1 for runtime failures.
//! Errors are reported on `err` as a single JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mixdeconv
