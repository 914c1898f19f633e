#pragma once

// Latency/energy model of one perception frame under an offloading mode.
//
// Units: durations in ms, rates in Mbit/s (== kbit/ms), sizes in kbit,
// powers in W. ms * W gives mJ; energies are reported in J.

#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace offsim {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// offload_i: the tail models of `offloaded` pipelines run on the edge server.
struct Action {
    int offloaded = 0;

    std::string name() const { return "offload_" + std::to_string(offloaded); }
    static Action parse(const std::string& text);
    auto operator<=>(const Action&) const = default;
};

enum class LatencyComposition { additive, overlapped };

std::string to_string(LatencyComposition c);
LatencyComposition parse_latency_composition(const std::string& text);

struct SystemParams {
    int n_pipelines = 4;
    double l_encoder_ms = 3.78;
    double l_tail_ms = 13.25;  // 17.03 - 3.78
    double p_local_w = 7.046;  // 0.48 J / 68.12 ms
    double p_tx_w = 1.3;
    double p_idle_w = 0.0;
    double b_up_kbit = 92.56;  // 11.57 kB
    double b_down_kbit = 4.0;
    double l_th_ms = 68.12;
    double map_th = 0.68;
    std::vector<Action> action_set{{0}, {2}, {3}};
    // Pipeline names; offload_order picks which ones leave the vehicle first.
    std::vector<std::string> pipelines{"radar", "lidar", "camera_left", "camera_right"};
    std::vector<std::string> offload_order{"camera_left", "camera_right", "lidar"};
    LatencyComposition latency_composition = LatencyComposition::overlapped;

    // Throws DomainError describing the first violated invariant.
    void validate() const;

    bool contains(Action a) const;
    std::size_t action_index(Action a) const;
    // Pipelines that stay local under `a`, in `pipelines` order.
    std::vector<std::string> local_subset(Action a) const;
    // "radar_lidar" style identifier of local_subset(a).
    std::string local_subset_id(Action a) const;
};

struct CostBreakdown {
    double l_local_ms = 0, l_tx_ms = 0, l_server_ms = 0, l_rx_ms = 0;
    double e_local_j = 0, e_tx_j = 0, e_idle_j = 0, e_rx_j = 0;
    double l_total_ms = 0;
    double e_total_j = 0;
};

struct CommCost {
    double l_tx_ms = 0, e_tx_j = 0, l_rx_ms = 0, e_rx_j = 0;
};

// Slack used when comparing a latency against the deadline, so that offload_0
// at exactly L_th is not rejected by rounding.
inline constexpr double kDeadlineSlackMs = 1e-9;

double latency_local(const SystemParams& p, Action a);
double energy_local(const SystemParams& p, Action a);
CommCost comm_cost(const SystemParams& p, Action a, double phi_up_mbps, double phi_down_mbps);
CostBreakdown total_cost(const SystemParams& p, Action a, double phi_up_mbps, double phi_down_mbps,
                         double server_delay_ms);

inline bool meets_deadline(const SystemParams& p, double l_total_ms) {
    return l_total_ms <= p.l_th_ms + kDeadlineSlackMs;
}

// Members of p.action_set (in order) whose l_total meets the deadline.
std::vector<Action> feasible_actions(const SystemParams& p, double phi_up_mbps, double phi_down_mbps,
                                     double server_delay_ms);

// Lowest-energy feasible action; exact ties go to the smaller i. Falls back to
// offload_0 when nothing meets the deadline.
Action min_energy_feasible(const SystemParams& p, double phi_up_mbps, double phi_down_mbps,
                           double server_delay_ms);

}  // namespace offsim
