#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pivotwalk/config.hpp"
#include "pivotwalk/pivots.hpp"
#include "pivotwalk/report.hpp"
#include "pivotwalk/schottky.hpp"

namespace pw {

const std::vector<std::string>& suite_names();

// Pattern search driven by the schottky table; K' = 0 means L0.
SearchResult run_schottky_search(const ExperimentConfig& cfg);

// Reference pivot model: from schottky.artifact when set, else searched.
// decay selects schottky.decay_alpha for the mixture weight.
PivotModel reference_model(const ExperimentConfig& cfg, bool decay = false);

// Unknown suite names and unusable configs throw ConfigError.
SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg, unsigned threads = 1);

// Recomputes one trial of a suite: its trajectory and per-trial statistics.
nlohmann::json replay_trial(const std::string& suite, const ExperimentConfig& cfg, std::size_t trial);

}  // namespace pw
