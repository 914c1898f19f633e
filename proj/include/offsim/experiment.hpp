#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "offsim/agent.hpp"
#include "offsim/config.hpp"
#include "offsim/env.hpp"
#include "offsim/scenario.hpp"

namespace offsim {

// Every tunable of a run, resolved from defaults < config file < overrides.
struct ExperimentConfig {
    EnvSpec env;
    GeneratorParams scenario;
    std::size_t eval_frames = 10000;
    std::uint64_t eval_trace_seed = 2024;
    std::size_t train_frames = 5000;
    std::uint64_t train_trace_seed = 7001;
    // When set, map_th is replaced by this quantile of the trace's map_full.
    std::optional<double> map_th_quantile;
    TrainConfig train;
    std::vector<std::uint64_t> eval_seeds{1, 2, 3, 4, 5};

    static ExperimentConfig from_config(const KeyValueConfig& cfg);
    KeyValueConfig to_config() const;
    void validate() const;

    ScenarioTrace eval_trace() const;
    ScenarioTrace train_trace() const;
    // Applies map_th_quantile (if any) against `trace`.
    void resolve_threshold(const ScenarioTrace& trace);
};

// Documented defaults, one `key = value` per line with comments.
std::string default_config_text();

std::vector<double> parse_grid(const std::string& text);

}  // namespace offsim
