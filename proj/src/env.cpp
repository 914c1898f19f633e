#include "offsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offsim {

std::string to_string(EnergyReference r) { return r == EnergyReference::observed ? "observed" : "realized"; }

EnergyReference parse_energy_reference(const std::string& text) {
    if (text == "observed") return EnergyReference::observed;
    if (text == "realized") return EnergyReference::realized;
    throw DomainError("reward.energy_reference must be observed or realized, got '" + text + "'");
}

std::string to_string(RewardCase c) {
    switch (c) {
        case RewardCase::uncertain: return "uncertain";
        case RewardCase::deadline_miss: return "deadline_miss";
        case RewardCase::energy_optimal: return "energy_optimal";
        case RewardCase::energy_suboptimal: return "energy_suboptimal";
    }
    return "?";
}

void RewardParams::validate() const {
    if (!(p_penalty < 0)) throw DomainError("reward.p_penalty must be < 0");
}

void EnvSpec::validate() const {
    system.validate();
    channel.validate();
    queue.validate();
    reward.validate();
}

Reward compute_reward(const SystemParams& params, const RewardParams& reward, double map_full, Action action,
                      double l_total_ms, double chosen_energy_j, std::span<const double> feasible_energies_j) {
    const double p = reward.p_penalty;
    if (map_full < params.map_th) {
        if (action.offloaded == 0) return {0.0, RewardCase::uncertain};
        return {p / (params.n_pipelines - action.offloaded), RewardCase::uncertain};
    }
    if (!meets_deadline(params, l_total_ms)) return {p, RewardCase::deadline_miss};
    if (feasible_energies_j.empty()) return {p, RewardCase::energy_suboptimal};
    const double best = *std::min_element(feasible_energies_j.begin(), feasible_energies_j.end());
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    if (std::abs(chosen_energy_j - best) <= tol) return {0.0, RewardCase::energy_optimal};
    return {p, RewardCase::energy_suboptimal};
}

Reward compute_reward(const SystemParams& params, const RewardParams& reward, const FrameRecord& frame,
                      Action action, const CostBreakdown& cost, std::span<const double> feasible_energies_j) {
    return compute_reward(params, reward, frame.map_full, action, cost.l_total_ms, cost.e_total_j,
                          feasible_energies_j);
}

std::vector<double> feasible_energies(const SystemParams& params, double phi_mbps, double server_delay_ms) {
    std::vector<double> out;
    for (const Action a : params.action_set) {
        const CostBreakdown c = total_cost(params, a, phi_mbps, phi_mbps, server_delay_ms);
        if (meets_deadline(params, c.l_total_ms)) out.push_back(c.e_total_j);
    }
    return out;
}

OffloadEnv::OffloadEnv(const ScenarioTrace& trace, EnvSpec spec) : trace_(&trace), spec_(std::move(spec)) {
    spec_.validate();
}

const FrameRecord& OffloadEnv::current_frame() const {
    if (done_) throw std::logic_error("episode is not running");
    return trace_->frames[t_];
}

State OffloadEnv::reset(std::uint64_t seed) {
    if (trace_->frames.empty()) throw TraceError("cannot reset on an empty trace");
    rng_ = Rng(seed);
    t_ = 0;
    done_ = false;
    started_ = true;
    state_.features = trace_->frames[0].features;
    state_.phi_obs = sample_capacity(spec_.channel, rng_);
    state_.q_obs = sample_delay(spec_.queue, rng_);
    return state_;
}

StepResult OffloadEnv::step(Action action) {
    if (!started_ || done_) throw std::logic_error("step() on a terminated episode; call reset()");
    const SystemParams& sys = spec_.system;
    if (!sys.contains(action)) throw DomainError(action.name() + " is not in the action set");

    const FrameRecord& frame = trace_->frames[t_];
    StepResult r;
    r.frame_index = t_;
    r.phi_mbps = sample_capacity(spec_.channel, rng_);
    r.server_delay_ms = sample_delay(spec_.queue, rng_);
    r.cost = total_cost(sys, action, r.phi_mbps, r.phi_mbps, r.server_delay_ms);
    r.deadline_met = meets_deadline(sys, r.cost.l_total_ms);
    r.realized_map = realized_map(frame, sys, action, r.deadline_met);

    Reward reward;
    if (spec_.reward.energy_reference == EnergyReference::realized) {
        const auto energies = feasible_energies(sys, r.phi_mbps, r.server_delay_ms);
        reward = compute_reward(sys, spec_.reward, frame, action, r.cost, energies);
    } else {
        const auto energies = feasible_energies(sys, state_.phi_obs, state_.q_obs);
        const double probed_energy = total_cost(sys, action, state_.phi_obs, state_.phi_obs, state_.q_obs).e_total_j;
        reward = compute_reward(sys, spec_.reward, frame.map_full, action, r.cost.l_total_ms, probed_energy, energies);
    }
    r.reward = reward.value;
    r.reward_case = reward.rcase;

    ++t_;
    done_ = t_ >= trace_->frames.size();
    r.terminal = done_;
    state_.features = done_ ? frame.features : trace_->frames[t_].features;
    state_.phi_obs = r.phi_mbps;
    state_.q_obs = r.server_delay_ms;
    r.next_state = state_;
    return r;
}

}  // namespace offsim
