#pragma once

#include "gent/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Experiment runner: a fixed registry of eight experiments, JSON-configured,
// emitting a deterministic CSV table plus a JSON summary with the config
// echo, per-assertion pass flags, extremal values and wall time.

namespace gent::experiments {

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json params;  // object; validated against the experiment schema
    std::uint64_t seed = 0;
    std::string output_path;  // directory for CSV/JSON output ("" = cwd)
};

struct Assertion {
    std::string name;
    bool pass;
    double value;    // measured quantity
    double limit;    // threshold it is compared against
    std::string detail;
};

struct ResultBundle {
    ExperimentConfig config;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<Assertion> assertions;
    std::map<std::string, double> extremals;
    double wall_time_seconds = 0.0;

    bool all_passed() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }
};

struct ParamSpec {
    std::string type;  // "number", "integer", "string", "number[]"
    std::string description;
    nlohmann::json default_value;
};

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::map<std::string, ParamSpec> schema;
};

// The fixed registry (8 entries).
const std::vector<ExperimentInfo>& registry();

// Parses and validates a config document. Throws ConfigInvalid on unknown
// experiment names, unknown parameter keys, or type mismatches.
ExperimentConfig parse_config(const nlohmann::json& doc);

// Runs the experiment; deterministic given (config, seed). No file I/O.
ResultBundle run(const ExperimentConfig& config);

// Deterministic CSV bytes: fixed header, 17-significant-digit numbers with
// '.' decimal separator and '\n' line endings.
std::string format_csv(const ResultBundle& bundle);

// JSON summary: config echo, assertions, extremal values, wall time.
nlohmann::json summary_json(const ResultBundle& bundle);

// Writes <experiment>.csv and <experiment>.json into the directory.
void write_outputs(const ResultBundle& bundle, const std::string& out_dir);

}  // namespace gent::experiments
