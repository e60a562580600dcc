#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inexact::harness {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNoConvergence = 3;

/// Runs `inexact <subcommand> ...`; args exclude the program name.
/// Subcommands: ot, barycenter, cluster, bench.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inexact::harness
