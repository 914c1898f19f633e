#include "offsim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace offsim {

Action Action::parse(const std::string& text) {
    std::string digits = text;
    if (digits.rfind("offload_", 0) == 0) digits = digits.substr(8);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
        throw DomainError("not an action: '" + text + "'");
    return Action{std::stoi(digits)};
}

std::string to_string(LatencyComposition c) {
    return c == LatencyComposition::additive ? "additive" : "overlapped";
}

LatencyComposition parse_latency_composition(const std::string& text) {
    if (text == "additive") return LatencyComposition::additive;
    if (text == "overlapped") return LatencyComposition::overlapped;
    throw DomainError("latency_composition must be additive or overlapped, got '" + text + "'");
}

void SystemParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be > 0");
    };
    if (n_pipelines < 1) throw DomainError("n_pipelines must be >= 1");
    positive(l_encoder_ms, "l_encoder_ms");
    positive(l_tail_ms, "l_tail_ms");
    positive(p_local_w, "p_local_w");
    positive(p_tx_w, "p_tx_w");
    positive(b_up_kbit, "b_up_kbit");
    positive(l_th_ms, "l_th_ms");
    if (p_idle_w < 0) throw DomainError("p_idle_w must be >= 0");
    if (b_down_kbit < 0) throw DomainError("b_down_kbit must be >= 0");
    if (!(map_th >= 0 && map_th <= 1)) throw DomainError("map_th must lie in [0,1]");
    if (static_cast<int>(pipelines.size()) != n_pipelines)
        throw DomainError("pipelines lists " + std::to_string(pipelines.size()) +
                          " names but n_pipelines = " + std::to_string(n_pipelines));
    if (std::set<std::string>(pipelines.begin(), pipelines.end()).size() != pipelines.size())
        throw DomainError("duplicate pipeline name");
    if (static_cast<int>(offload_order.size()) != n_pipelines - 1)
        throw DomainError("offload_order must name exactly n_pipelines-1 pipelines");
    std::set<std::string> seen;
    for (const auto& name : offload_order) {
        if (std::find(pipelines.begin(), pipelines.end(), name) == pipelines.end())
            throw DomainError("offload_order names unknown pipeline '" + name + "'");
        if (!seen.insert(name).second) throw DomainError("offload_order repeats '" + name + "'");
    }
    if (action_set.empty()) throw DomainError("action_set is empty");
    for (std::size_t k = 0; k < action_set.size(); ++k) {
        const int i = action_set[k].offloaded;
        if (i < 0 || i >= n_pipelines)
            throw DomainError(action_set[k].name() + " outside offload_0..offload_" +
                              std::to_string(n_pipelines - 1));
        if (k > 0 && action_set[k - 1].offloaded >= i)
            throw DomainError("action_set must be strictly increasing in i");
    }
    if (!contains(Action{0}) || !contains(Action{n_pipelines - 1}))
        throw DomainError("action_set must contain offload_0 and offload_" + std::to_string(n_pipelines - 1));
}

bool SystemParams::contains(Action a) const {
    return std::find(action_set.begin(), action_set.end(), a) != action_set.end();
}

std::size_t SystemParams::action_index(Action a) const {
    const auto it = std::find(action_set.begin(), action_set.end(), a);
    if (it == action_set.end()) throw DomainError(a.name() + " is not in the action set");
    return static_cast<std::size_t>(it - action_set.begin());
}

std::vector<std::string> SystemParams::local_subset(Action a) const {
    if (a.offloaded < 0 || a.offloaded >= n_pipelines) throw DomainError("invalid " + a.name());
    const std::set<std::string> remote(offload_order.begin(), offload_order.begin() + a.offloaded);
    std::vector<std::string> local;
    for (const auto& name : pipelines)
        if (!remote.count(name)) local.push_back(name);
    return local;
}

std::string SystemParams::local_subset_id(Action a) const {
    std::string id;
    for (const auto& name : local_subset(a)) id += (id.empty() ? "" : "_") + name;
    return id;
}

namespace {

void check_action(const SystemParams& p, Action a) {
    if (a.offloaded < 0 || a.offloaded >= p.n_pipelines)
        throw DomainError(a.name() + " requires 0 <= i < N = " + std::to_string(p.n_pipelines));
}

double encoders_ms(const SystemParams& p) { return p.n_pipelines * p.l_encoder_ms; }

}  // namespace

double latency_local(const SystemParams& p, Action a) {
    check_action(p, a);
    return encoders_ms(p) + (p.n_pipelines - a.offloaded) * p.l_tail_ms;
}

double energy_local(const SystemParams& p, Action a) {
    return latency_local(p, a) * p.p_local_w / 1000.0;
}

CommCost comm_cost(const SystemParams& p, Action a, double phi_up_mbps, double phi_down_mbps) {
    check_action(p, a);
    if (!(phi_up_mbps > 0) || !(phi_down_mbps > 0))
        throw DomainError("channel rate must be > 0 Mbit/s");
    CommCost c;
    c.l_tx_ms = a.offloaded * p.b_up_kbit / phi_up_mbps;
    c.e_tx_j = c.l_tx_ms * p.p_tx_w / 1000.0;
    c.l_rx_ms = a.offloaded * p.b_down_kbit / phi_down_mbps;
    c.e_rx_j = c.l_rx_ms * p.p_tx_w / 1000.0;
    return c;
}

CostBreakdown total_cost(const SystemParams& p, Action a, double phi_up_mbps, double phi_down_mbps,
                         double server_delay_ms) {
    if (!(server_delay_ms >= 0)) throw DomainError("server delay must be >= 0 ms");
    const CommCost comm = comm_cost(p, a, phi_up_mbps, phi_down_mbps);
    CostBreakdown c;
    c.l_local_ms = latency_local(p, a);
    c.e_local_j = c.l_local_ms * p.p_local_w / 1000.0;
    if (a.offloaded > 0) {
        c.l_tx_ms = comm.l_tx_ms;
        c.e_tx_j = comm.e_tx_j;
        c.l_rx_ms = comm.l_rx_ms;
        c.e_rx_j = comm.e_rx_j;
        c.l_server_ms = server_delay_ms;
    }
    const double remote_ms = c.l_tx_ms + c.l_server_ms + c.l_rx_ms;
    if (p.latency_composition == LatencyComposition::additive) {
        c.l_total_ms = c.l_local_ms + remote_ms;
        c.e_idle_j = p.p_idle_w * remote_ms / 1000.0;
    } else {
        // Both branches start once the encoders are done.
        const double enc = encoders_ms(p);
        const double tails_ms = c.l_local_ms - enc;
        c.l_total_ms = a.offloaded > 0 ? std::max(c.l_local_ms, enc + remote_ms) : c.l_local_ms;
        c.e_idle_j = a.offloaded > 0 ? p.p_idle_w * std::max(0.0, remote_ms - tails_ms) / 1000.0 : 0.0;
    }
    c.e_total_j = c.e_local_j + c.e_tx_j + c.e_idle_j + c.e_rx_j;
    return c;
}

std::vector<Action> feasible_actions(const SystemParams& p, double phi_up_mbps, double phi_down_mbps,
                                     double server_delay_ms) {
    std::vector<Action> out;
    for (const Action a : p.action_set)
        if (meets_deadline(p, total_cost(p, a, phi_up_mbps, phi_down_mbps, server_delay_ms).l_total_ms))
            out.push_back(a);
    return out;
}

Action min_energy_feasible(const SystemParams& p, double phi_up_mbps, double phi_down_mbps,
                           double server_delay_ms) {
    Action best{0};
    double best_energy = std::numeric_limits<double>::infinity();
    for (const Action a : p.action_set) {
        const CostBreakdown c = total_cost(p, a, phi_up_mbps, phi_down_mbps, server_delay_ms);
        if (!meets_deadline(p, c.l_total_ms)) continue;
        // action_set is ordered by i, so strict < keeps the smaller i on ties.
        if (c.e_total_j < best_energy) {
            best = a;
            best_energy = c.e_total_j;
        }
    }
    return best;
}

}  // namespace offsim
