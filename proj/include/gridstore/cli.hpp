#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridstore {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRejected = 3;

/// Entry point of the `gridstore` tool. args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace gridstore
