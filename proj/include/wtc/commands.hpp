#pragma once

// Command-line driver: `wtc <command> --workspace <path> [--json] [flags]`.

#include <ostream>
#include <string>
#include <vector>

#include "wtc/report.hpp"
#include "wtc/workspace.hpp"

namespace wtc {

enum ExitCode { kExitPass = 0, kExitFailure = 1, kExitUsage = 2 };

/// Seed from WTC_SEED, or 0.
unsigned seed_from_env();

/// Parses arguments, runs one command and writes its report. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wtc
