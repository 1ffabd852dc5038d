#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace caprank {

/// Exit statuses of the command-line tool.
enum ExitStatus : int {
  kExitOk = 0,
  kExitSceneFailure = 1,  // at least one scene failed; the rest were written
  kExitConfigError = 2,   // bad flags or unreadable input; nothing written
};

/// Runs `caprank <command> [flags]`. `args` excludes the program name.
/// Commands: rank, evaluate, synth, report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace caprank
