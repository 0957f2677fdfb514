#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace wigcn {

enum ExitCode : int {
    kExitSuccess = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumerical = 3,
};

/// Entry point of the `wigcn` tool. `args` excludes the program name.
/// Results go to `out` as JSON, diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace wigcn
