#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "offsim/env.hpp"
#include "offsim/policies.hpp"

namespace offsim {

struct ActionStats {
    Action action;
    std::size_t count = 0;
    double frequency_pct = 0;
    // Mean full-fusion mAP of the frames mapped to this action; NaN if never chosen.
    double amap_pct = 0;
    // Mean mAP actually delivered (partial fusion on deadline misses).
    double realized_amap_pct = 0;
};

struct EvalReport {
    std::string policy;
    std::size_t n_seeds = 0;
    std::size_t decisions = 0;
    std::size_t offload_decisions = 0;
    std::vector<ActionStats> per_action;
    // Shares of offloading decisions taken on frames below / at-or-above map_th.
    double risky_pct = 0;
    double robust_pct = 0;
    // Energy of one pass over the trace, averaged over seeds.
    double total_energy_j = 0;
    double local_energy_j = 0;
    double energy_reduction_pct = 0;
    double deadline_miss_pct = 0;
    double mean_reward = 0;

    const ActionStats& stats(Action a) const;
};

using StepObserver = std::function<void(std::uint64_t seed, const PolicyDecision&, const StepResult&)>;

// Replays the trace once per seed and aggregates; seeds are processed in order.
EvalReport evaluate(const Policy& policy, const ScenarioTrace& trace, const EnvSpec& spec,
                    const std::vector<std::uint64_t>& seeds, const StepObserver& observer = {});

// policy,action,count,frequency_pct,amap_pct,realized_amap_pct,risky_pct,robust_pct,
// total_energy_j,energy_reduction_pct,deadline_miss_pct,mean_reward
std::string eval_report_csv(const std::vector<EvalReport>& reports);

struct SweepRow {
    double phi_mbps = 0;
    double q_ms = 0;
    Action action;
    CostBreakdown cost;
    bool feasible = false;
};

// Deterministic cost-model sweeps (no sampling). Downlink rate equals uplink.
std::vector<SweepRow> sweep_channel(const SystemParams& params, const std::vector<double>& phi_grid, double fixed_q_ms);
std::vector<SweepRow> sweep_queue(const SystemParams& params, const std::vector<double>& q_grid, double fixed_phi_mbps);

// phi_mbps,q_ms,action,l_local_ms,l_tx_ms,l_server_ms,l_rx_ms,l_total_ms,e_total_j,feasible
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Smallest grid rate at which `a` meets the deadline; NaN if never.
double min_feasible_phi(const std::vector<SweepRow>& rows, Action a);

// seed,frame,action,rationale,phi_mbps,server_delay_ms,l_total_ms,e_total_j,deadline_met,map_full,realized_map,reward,reward_case
class StepLogCsv {
public:
    StepLogCsv();
    void add(std::uint64_t seed, const PolicyDecision& d, const StepResult& r, double map_full);
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

}  // namespace offsim
