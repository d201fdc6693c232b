#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace polyberg::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kNumericalFailure = 3,
    /// A divergence verdict was produced where a value was requested.
    kDivergence = 4,
};

/// Runs one subcommand. `args` excludes the program name. The JSON report
/// goes to `out` (or the --output file); errors go to `err` as a JSON
/// object {"error": {"kind": ..., "message": ...}}.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of the text.
std::string sha256_hex(const std::string& text);

/// Experiment names accepted by `experiment`.
const std::vector<std::string>& experiment_names();

/// Runs a named experiment on an effective configuration and returns the
/// report body (without provenance). Sets `expectation_met`.
nlohmann::json run_experiment(const std::string& name, const nlohmann::json& config, bool& expectation_met);

} // namespace polyberg::cli
