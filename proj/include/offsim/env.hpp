#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "offsim/channel.hpp"
#include "offsim/cost_model.hpp"
#include "offsim/queue.hpp"
#include "offsim/random.hpp"
#include "offsim/scenario.hpp"

namespace offsim {

// Which (phi, q) the energy-optimality check of the reward is evaluated at.
enum class EnergyReference {
    observed,  // the probed values the decision was made on
    realized,  // the draw the frame actually experienced (ex-post)
};

std::string to_string(EnergyReference r);
EnergyReference parse_energy_reference(const std::string& text);

struct RewardParams {
    double p_penalty = -2.0;
    EnergyReference energy_reference = EnergyReference::observed;

    void validate() const;
};

// Everything the environment needs besides the trace.
struct EnvSpec {
    SystemParams system;
    ChannelModel channel;
    QueueModel queue;
    RewardParams reward;

    void validate() const;
};

struct State {
    std::vector<double> features;
    double phi_obs = 0;  // Mbit/s, previous frame's realized capacity
    double q_obs = 0;    // ms, previous frame's realized server delay
};

enum class RewardCase {
    uncertain,          // map_full < map_th: 0 for offload_0, P/(N-i) otherwise
    deadline_miss,      // l_total > L_th: P
    energy_optimal,     // feasible and minimal energy: 0
    energy_suboptimal,  // feasible but not minimal: P
};

std::string to_string(RewardCase c);

struct Reward {
    double value = 0;
    RewardCase rcase = RewardCase::energy_optimal;
};

// `chosen_energy_j` and `feasible_energies_j` must come from the same cost
// evaluation; the chosen action earns 0 in the last case only if its energy
// equals the minimum of the feasible set.
Reward compute_reward(const SystemParams& params, const RewardParams& reward, double map_full, Action action,
                      double l_total_ms, double chosen_energy_j, std::span<const double> feasible_energies_j);

Reward compute_reward(const SystemParams& params, const RewardParams& reward, const FrameRecord& frame,
                      Action action, const CostBreakdown& cost, std::span<const double> feasible_energies_j);

// e_total of each action in the action set that meets the deadline at (phi, q).
std::vector<double> feasible_energies(const SystemParams& params, double phi_mbps, double server_delay_ms);

struct StepResult {
    State next_state;
    double reward = 0;
    RewardCase reward_case = RewardCase::energy_optimal;
    CostBreakdown cost;
    double realized_map = 0;
    bool deadline_met = false;
    std::size_t frame_index = 0;
    bool terminal = false;
    double phi_mbps = 0;
    double server_delay_ms = 0;
};

// One episode is one pass over the trace. The trace must outlive the env.
class OffloadEnv {
public:
    OffloadEnv(const ScenarioTrace& trace, EnvSpec spec);

    State reset(std::uint64_t seed);
    StepResult step(Action action);

    bool done() const { return done_; }
    std::size_t frame_index() const { return t_; }
    const FrameRecord& current_frame() const;
    const State& state() const { return state_; }
    const EnvSpec& spec() const { return spec_; }
    const ScenarioTrace& trace() const { return *trace_; }

private:
    const ScenarioTrace* trace_;
    EnvSpec spec_;
    Rng rng_{0};
    State state_;
    std::size_t t_ = 0;
    bool started_ = false;
    bool done_ = true;
};

}  // namespace offsim
