#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace dci::cli {

/// Batch entry point configuration; unknown keys in config files are
/// rejected, defaults are echoed into every report.
struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::uint64_t seed = 1;
    double tol = 1e-9;
    int depth = 6;
    std::size_t trials = 1000;
    std::string format = "json"; // json | csv
};

/// Executes one subcommand. Returns the process exit status: 0 when all
/// asserted checks pass, 1 on a check failure, 2 on a configuration
/// error. The report lands at the configured output path (or the
/// DCI_REPORT_DIR override).
int run(const RunConfig& config, nlohmann::json* report_out = nullptr);

} // namespace dci::cli
