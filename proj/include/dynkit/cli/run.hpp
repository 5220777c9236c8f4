#pragma once

#include "dynkit/cli/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynkit::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitAssertion = 3 };

/// Subcommands: every experiment name plus "all".
const std::vector<std::string>& subcommands();

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides output_dir
    std::optional<std::uint64_t> seed;             // overrides rng_seed
    std::optional<int> threads;                    // overrides threads
};

struct RunOutcome {
    int exit_code = kExitOk;
    Json report;
    std::filesystem::path out_dir;
};

/// Validates the config, runs the subcommand and writes report.json,
/// timings.json and the artifacts. Throws ConfigError on invalid input.
RunOutcome run(const std::string& subcommand, const Json& raw_config, const RunOptions& options = {});

/// Command-line front end; returns the process exit code.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dynkit::cli
