#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpbsde/finance.hpp"

namespace jumpbsde::cli {

/// Flat experiment description read from YAML. Times in model time units, rates per
/// unit time, tolerances in squared B-distance unless noted.
struct ExperimentConfig {
    std::vector<std::string> states;
    std::vector<std::vector<double>> rates;
    double horizon = 1.0;
    double start_time = 0.0;
    std::string start_state;
    std::string modulation = "none";
    std::vector<double> modulation_params;

    std::string driver = "zero";
    std::map<std::string, double> driver_params;
    std::vector<double> terminal;

    std::size_t grid = 1000;
    std::string solver = "lipschitz";
    double picard_tol = 1e-12;
    std::size_t max_iter = 200;
    std::vector<double> radii{2, 4, 8, 16, 32, 64};
    std::optional<double> delta;
    double cascade_tol = 1e-6;

    std::uint64_t seed = 1;
    std::size_t paths = 1000;
    unsigned threads = 1;

    double sigma = 1.0;
    std::vector<double> stability_indices{1, 2, 4, 8, 16, 32};
    double stability_scale = 1.0;
    double stability_tol = 1e-3;
    double verify_residual_tol = 1e-3;
    std::optional<std::filesystem::path> value_file;
};

/// Parses and validates; throws ConfigError naming the first violated constraint.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Re-validates after command-line overrides.
void validate(const ExperimentConfig& config);

/// Canonical JSON of every setting that affects results (threads excluded).
nlohmann::json canonical(const ExperimentConfig& config);

/// hex FNV-1a of the canonical JSON text.
std::string fingerprint(const ExperimentConfig& config);

MarkovModel build_model(const ExperimentConfig& config);
Driver build_driver(const ExperimentConfig& config);

}  // namespace jumpbsde::cli
