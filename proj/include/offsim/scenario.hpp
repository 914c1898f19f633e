#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "offsim/cost_model.hpp"

namespace offsim {

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FrameRecord {
    std::vector<double> features;
    double map_full = 0;
    // Local-subset id ("radar_lidar") -> mAP when only that subset fuses.
    std::map<std::string, double> map_partial;
};

struct ScenarioTrace {
    std::vector<FrameRecord> frames;
    std::size_t k = 0;
    std::vector<std::string> metadata;

    std::size_t size() const { return frames.size(); }
    // Throws TraceError if the trace is empty or not uniform.
    void validate() const;
};

// Synthetic driving-scene generator. A latent complexity z in [0,1] follows
//   z' = alpha z + (1 - alpha) mu + eps,  eps ~ N(0, z_noise^2), clipped,
// and drives mAP and the contextual features.
struct GeneratorParams {
    double base = 0.85;
    double span = 0.5;
    double alpha = 0.95;
    double mu = 0.4;
    double z_noise = 0.08;
    double map_noise = 0.02;
    int k = 16;
    double feature_noise = 0.05;
    // Partial-fusion loss for the smallest subset is degradation_base +
    // degradation_slope * z; larger subsets lose proportionally less.
    double degradation_base = 0.05;
    double degradation_slope = 0.25;
    // Seeds the feature embedding, shared by every trace so that agents
    // trained on one trace read features of another the same way.
    std::uint64_t embedding_seed = 7;

    void validate() const;
};

// Partial-fusion column ids, one per offloading action in params.action_set.
std::vector<std::string> partial_keys(const SystemParams& params);

ScenarioTrace generate_synthetic(const GeneratorParams& gen, const SystemParams& params, std::size_t n_frames,
                                 std::uint64_t seed);

// CSV: f0..f{k-1},map_full,map_<subset>...; '#' comment lines allowed.
std::string trace_to_csv(const ScenarioTrace& trace, const SystemParams& params);
ScenarioTrace parse_trace_csv(const std::string& text, const SystemParams& params,
                              const std::string& origin = "<trace>");
ScenarioTrace load_trace(const std::string& path, const SystemParams& params = SystemParams{});
void save_trace(const std::string& path, const ScenarioTrace& trace, const SystemParams& params);

// Full-fusion mAP if nothing was offloaded or everything arrived in time,
// otherwise the mAP of the pipelines that stayed local.
double realized_map(const FrameRecord& frame, const SystemParams& params, Action action, bool all_arrived);

// Value at quantile q in [0,1] of the trace's map_full (nearest rank).
double map_full_quantile(const ScenarioTrace& trace, double q);
double mean_map_full(const ScenarioTrace& trace);

}  // namespace offsim
