#pragma once

/// @file commands.hpp
/// @brief The subcommands behind the pseudolab executable.

#include <iosfwd>
#include <string>
#include <vector>

#include "pseudolab/config.hpp"

namespace pseudolab {

struct CommandResult {
  /// Paths written, in order.
  std::vector<std::string> files;
  /// One "check-name: detail" entry per failed internal check.
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Validates the config, runs its subcommand and writes the outputs into
/// cfg.out (created if missing). Human-readable progress goes to `log`.
CommandResult run_command(const RunConfig& cfg, std::ostream& log);

CommandResult cmd_map(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_blowup(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_bound(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_eigs(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_rankone(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_twist(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_wkbcheck(const RunConfig& cfg, std::ostream& log);

}  // namespace pseudolab
