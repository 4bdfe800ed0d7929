// Subcommand implementations. Each command computes all of its artifacts in
// memory; nothing is written until the whole run has succeeded.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli/config.hpp"
#include "cli/csv.hpp"

namespace cavpump::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, config_error = 2, integration_failure = 3, degenerate_parameters = 4 };

struct Invocation {
  std::string command;  // spectrum | dynamics | rates | sweep
  Settings settings;
  unsigned jobs = 1;
};

struct CommandResult {
  OutputSet outputs;
  std::string summary;           // printed on stdout
  std::vector<std::string> warnings;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Runs a command and stages its CSV files together with the JSON manifest.
CommandResult run_command(const Invocation& invocation);

/// Scalar observables available to `sweep` for a base command.
const std::vector<std::string>& sweep_observables(const std::string& command);

/// Scalar observables of one run of `command` (spectrum, dynamics or rates).
std::map<std::string, double> evaluate_scalars(const std::string& command, const Settings& settings);

/// Sweep axis: "start:stop:count" or a comma-separated list.
std::vector<double> parse_axis(const std::string& key, const std::string& text);

/// Reads a manifest written by run_command and rebuilds its invocation.
Invocation invocation_from_manifest(const std::filesystem::path& manifest);

/// run_command + commit + exception-to-exit-code mapping.
int execute(const Invocation& invocation, const std::filesystem::path& out_dir, std::ostream& out,
            std::ostream& err);

/// Maps the active exception to an exit code and writes its message to `err`.
int report_exception(std::ostream& err);

}  // namespace cavpump::cli
