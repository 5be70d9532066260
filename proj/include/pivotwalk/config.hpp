#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pivotwalk/pivots.hpp"
#include "pivotwalk/walk.hpp"

namespace pw {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    std::string space = "tree";  // tree | hyperbolic_plane
    int rank = 2;
    // Tree steps as words over a, b, ... (capitals are inverses).
    std::vector<std::string> support{"a", "A", "b", "B", "ab", "BA"};
    std::vector<double> weights;  // empty means uniform
    // Plane steps as (a, b, c, d).
    std::vector<std::array<double, 4>> matrices;
    bool operator==(const ModelConfig&) const = default;
};

struct SchottkyConfig {
    std::size_t target_size = 310;
    double Kprime = 0;  // 0 means L0
    int pattern_length = 10;
    std::uint64_t probe_seed = 1;
    std::size_t probe_count = 256;
    std::size_t S_size = 305;
    int N = 1;
    std::string mode = "mixture";  // mixture | exact
    double alpha = 0.5;
    double decay_alpha = 0.02;
    std::string artifact;  // stored set to use instead of searching
    bool operator==(const SchottkyConfig&) const = default;
};

struct RunConfig {
    std::optional<std::uint64_t> seed;
    std::size_t n = 0;       // 0: suite default
    std::size_t trials = 0;  // 0: suite default
    double horizon_multiplier = 2;
    std::vector<std::size_t> checkpoints;
    bool operator==(const RunConfig&) const = default;
};

struct ExperimentConfig {
    ModelConfig model;
    SchottkyConfig schottky;
    RunConfig run;
    std::string outputs = "out";
    bool operator==(const ExperimentConfig&) const = default;
};

// Unknown keys and ill-typed values throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig parse_config_yaml(const std::string& text);
ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_yaml(const ExperimentConfig& c);
// .json files are read as JSON, anything else as YAML.
ExperimentConfig load_config(const std::string& path);

// FNV-1a over the canonical JSON form.
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const ExperimentConfig& c);

std::uint64_t require_seed(const ExperimentConfig& c);
WordDistribution tree_law(const ModelConfig& m);
StepDistribution<Moebius> plane_law(const ModelConfig& m);
PivotModelConfig pivot_config(const ExperimentConfig& c, bool decay = false);

}  // namespace pw
