#pragma once

// hybridsim subcommands. Exit codes: 0 success, 1 failed check, 2 bad
// configuration or usage, 3 run stopped early (Zeno guard, stiffness, error).

#include "hybrid/config.hpp"
#include "hybrid/zoo.hpp"

#include <ostream>

namespace hybrid {

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitRuntime = 3 };

/// Initial state from the config, or the entry's default. Throws ConfigError.
Vec initial_state(const ZooEntry& e, const RunConfig& cfg);

int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_density(const RunConfig& cfg, std::ostream& out);
int cmd_zeno(const RunConfig& cfg, std::ostream& out);
int cmd_list_systems(std::ostream& out);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hybrid
