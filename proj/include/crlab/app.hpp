#pragma once

// Run configuration, orchestration of the subcommands and persistence of
// reports and CSV tables for the crlab command-line tool.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crlab/models.hpp"

namespace crlab::app {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ModelConfig {
    double p = 1.0;
    double q = 1.0;
    int resolution = 64;
    double delta1 = 0.25;
    double delta2 = 0.75;
    std::size_t m0 = 1;
};

struct Tolerances {
    double solve = 1e-12;
    double certificate = 1e-10;
    double invariant = 1e-10;
    double equivariance = 1e-9;
    double window = 1e-3;
    double example = 1e-13;
};

struct RunConfig {
    ModelConfig model;
    /// Model used for the first-derivative decay rate; defaults to `model`.
    std::optional<ModelConfig> derivative_model;
    std::vector<double> k_grid{16, 32, 64, 128};
    std::vector<double> spectrum_k_grid{16, 32, 64, 128};
    std::vector<double> kernel_k_grid{16, 32, 64, 128};
    double kernel_check_k = 64;
    std::optional<double> spectrum_cap;
    int moment_order = 8;
    SampleScheme scheme = SampleScheme::HopfGrid;
    std::size_t sample_count = 200;
    std::size_t quasi_random_count = 64;
    std::size_t pair_count = 200;
    std::size_t solver_pairs = 100;
    std::uint64_t seed = 7;
    Tolerances tolerances;
    std::vector<double> example_epsilons{0.05, 0.1, 0.5};
    double continuation_epsilon = 1e-3;
    int continuation_directions = 5;
    /// Extra continuation bases: exponent pairs on the configured model, with r.
    struct Base {
        std::vector<std::pair<int, int>> modes;
        std::vector<double> r;
    };
    std::vector<Base> continuation_bases;
    std::string out_dir = ".";
    int jobs = 1;
};

RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);
json to_json(const RunConfig& c);

struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string render() const;
};

/// Full-precision float formatting used in every CSV.
std::string format_double(double v);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    json details;
    /// False when the criterion is not defined for the configured model.
    bool applicable = true;

    std::string status() const { return applicable ? (pass ? "PASS" : "FAIL") : "N/A"; }
};

struct RunOutput {
    json report;
    std::vector<CsvTable> tables;
    std::vector<CriterionResult> criteria;

    const CriterionResult* criterion(int id) const;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"spectrum", "kernel", "embed",   "deform",
                                                "continue", "example", "rates", "all"};
    return names;
}

/// Runs one subcommand in memory. Throws on failure (see error_record).
RunOutput run(const std::string& subcommand, const RunConfig& config);

/// Writes report.json and the CSV tables into `dir`, creating it if needed.
void write_outputs(const RunOutput& out, const std::string& dir);

/// Machine-readable description of an exception thrown by run().
json error_record(const std::exception& e, const std::string& subcommand);
/// Process exit status for an exception thrown by run().
int exit_status(const std::exception& e);

}  // namespace crlab::app
