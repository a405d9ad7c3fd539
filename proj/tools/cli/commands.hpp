#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"

namespace frontlab::cli {

struct CsvTable {
    std::string name;  ///< file name inside the run directory
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// What a pipeline produced: a deterministic JSON record, CSV tables and named checks.
struct Outcome {
    nlohmann::ordered_json result = nlohmann::ordered_json::object();
    std::vector<CsvTable> tables;
    std::vector<std::pair<std::string, bool>> checks;
};

struct RunOptions {
    std::filesystem::path out_root = "runs";
    int jobs = 1;
    bool model_problem = false;
};

enum ExitCode : int { exit_pass = 0, exit_check_failed = 1, exit_config_error = 2, exit_numerical_failure = 3 };

struct RunReport {
    int exit_code = exit_pass;
    std::filesystem::path directory;
    nlohmann::ordered_json manifest;
};

Outcome cmd_speed(const Config& config, const RunOptions& options);
Outcome cmd_front(const Config& config, const RunOptions& options);
Outcome cmd_spectrum(const Config& config, const RunOptions& options);
Outcome cmd_approx(const Config& config, const RunOptions& options);
Outcome cmd_simulate(const Config& config, const RunOptions& options);

/// Runs one command and writes result.json, the CSV tables and manifest.json under
/// out_root/<command>-<digest>; the manifest is written on every path, failures included.
RunReport run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options);

/// Command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace frontlab::cli
