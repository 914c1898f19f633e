#include "offsim/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "offsim/csv.hpp"

namespace offsim {

const ActionStats& EvalReport::stats(Action a) const {
    for (const auto& s : per_action)
        if (s.action == a) return s;
    throw std::out_of_range(a.name() + " not in report");
}

EvalReport evaluate(const Policy& policy, const ScenarioTrace& trace, const EnvSpec& spec,
                    const std::vector<std::uint64_t>& seeds, const StepObserver& observer) {
    if (seeds.empty()) throw std::invalid_argument("evaluate needs at least one seed");
    const SystemParams& sys = spec.system;
    const std::size_t n_actions = sys.action_set.size();
    std::vector<std::size_t> counts(n_actions, 0);
    std::vector<double> map_sum(n_actions, 0.0), realized_sum(n_actions, 0.0);
    std::size_t risky = 0, offloads = 0, misses = 0, decisions = 0;
    double energy = 0, reward = 0;

    OffloadEnv env(trace, spec);
    for (const std::uint64_t seed : seeds) {
        State s = env.reset(seed);
        while (!env.done()) {
            const double map_full = env.current_frame().map_full;
            const PolicyDecision d = policy.decide(Observation{s, map_full});
            const StepResult r = env.step(d.action);
            const std::size_t idx = sys.action_index(d.action);
            ++counts[idx];
            map_sum[idx] += map_full;
            realized_sum[idx] += r.realized_map;
            if (d.action.offloaded > 0) {
                ++offloads;
                if (map_full < sys.map_th) ++risky;
            }
            if (!r.deadline_met) ++misses;
            energy += r.cost.e_total_j;
            reward += r.reward;
            ++decisions;
            if (observer) observer(seed, d, r);
            s = r.next_state;
        }
    }

    EvalReport rep;
    rep.policy = policy.name();
    rep.n_seeds = seeds.size();
    rep.decisions = decisions;
    rep.offload_decisions = offloads;
    const double n = static_cast<double>(decisions);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t a = 0; a < n_actions; ++a) {
        ActionStats st;
        st.action = sys.action_set[a];
        st.count = counts[a];
        st.frequency_pct = 100.0 * static_cast<double>(counts[a]) / n;
        st.amap_pct = counts[a] ? 100.0 * map_sum[a] / static_cast<double>(counts[a]) : nan;
        st.realized_amap_pct = counts[a] ? 100.0 * realized_sum[a] / static_cast<double>(counts[a]) : nan;
        rep.per_action.push_back(st);
    }
    rep.risky_pct = offloads ? 100.0 * static_cast<double>(risky) / static_cast<double>(offloads) : 0.0;
    rep.robust_pct = offloads ? 100.0 - rep.risky_pct : 0.0;
    rep.total_energy_j = energy / static_cast<double>(seeds.size());
    rep.local_energy_j = static_cast<double>(trace.size()) * energy_local(sys, Action{0});
    rep.energy_reduction_pct = 100.0 * (1.0 - rep.total_energy_j / rep.local_energy_j);
    rep.deadline_miss_pct = 100.0 * static_cast<double>(misses) / n;
    rep.mean_reward = reward / n;
    return rep;
}

namespace {

std::string pct(double v) { return std::isnan(v) ? "" : fixed(v, 2); }

}  // namespace

std::string eval_report_csv(const std::vector<EvalReport>& reports) {
    std::string out =
        "policy,action,count,frequency_pct,amap_pct,realized_amap_pct,risky_pct,robust_pct,"
        "total_energy_j,energy_reduction_pct,deadline_miss_pct,mean_reward\n";
    for (const auto& r : reports)
        for (const auto& s : r.per_action)
            out += join({r.policy, s.action.name(), std::to_string(s.count), pct(s.frequency_pct), pct(s.amap_pct),
                         pct(s.realized_amap_pct), pct(r.risky_pct), pct(r.robust_pct), fixed(r.total_energy_j, 6),
                         pct(r.energy_reduction_pct), pct(r.deadline_miss_pct), fixed(r.mean_reward, 6)}) +
                   "\n";
    return out;
}

namespace {

void add_rows(std::vector<SweepRow>& rows, const SystemParams& params, double phi, double q) {
    for (const Action a : params.action_set) {
        SweepRow row;
        row.phi_mbps = phi;
        row.q_ms = q;
        row.action = a;
        row.cost = total_cost(params, a, phi, phi, q);
        row.feasible = meets_deadline(params, row.cost.l_total_ms);
        rows.push_back(row);
    }
}

}  // namespace

std::vector<SweepRow> sweep_channel(const SystemParams& params, const std::vector<double>& phi_grid, double fixed_q_ms) {
    if (phi_grid.empty()) throw std::invalid_argument("empty channel grid");
    std::vector<SweepRow> rows;
    for (const double phi : phi_grid) add_rows(rows, params, phi, fixed_q_ms);
    return rows;
}

std::vector<SweepRow> sweep_queue(const SystemParams& params, const std::vector<double>& q_grid, double fixed_phi_mbps) {
    if (q_grid.empty()) throw std::invalid_argument("empty queue grid");
    std::vector<SweepRow> rows;
    for (const double q : q_grid) add_rows(rows, params, fixed_phi_mbps, q);
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "phi_mbps,q_ms,action,l_local_ms,l_tx_ms,l_server_ms,l_rx_ms,l_total_ms,e_total_j,feasible\n";
    for (const auto& r : rows)
        out += join({fixed(r.phi_mbps, 4), fixed(r.q_ms, 4), r.action.name(), fixed(r.cost.l_local_ms, 4),
                     fixed(r.cost.l_tx_ms, 4), fixed(r.cost.l_server_ms, 4), fixed(r.cost.l_rx_ms, 4),
                     fixed(r.cost.l_total_ms, 4), fixed(r.cost.e_total_j, 6), r.feasible ? "1" : "0"}) +
               "\n";
    return out;
}

double min_feasible_phi(const std::vector<SweepRow>& rows, Action a) {
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows)
        if (r.action == a && r.feasible && !(r.phi_mbps >= best)) best = r.phi_mbps;
    return best;
}

StepLogCsv::StepLogCsv()
    : text_("seed,frame,action,rationale,phi_mbps,server_delay_ms,l_total_ms,e_total_j,deadline_met,map_full,"
            "realized_map,reward,reward_case\n") {}

void StepLogCsv::add(std::uint64_t seed, const PolicyDecision& d, const StepResult& r, double map_full) {
    text_ += join({std::to_string(seed), std::to_string(r.frame_index), d.action.name(), to_string(d.rationale),
                   fixed(r.phi_mbps, 6), fixed(r.server_delay_ms, 6), fixed(r.cost.l_total_ms, 6),
                   fixed(r.cost.e_total_j, 9), r.deadline_met ? "1" : "0", fixed(map_full, 6),
                   fixed(r.realized_map, 6), fixed(r.reward, 6), to_string(r.reward_case)}) +
             "\n";
}

}  // namespace offsim
