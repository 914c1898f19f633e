#pragma once

#include <memory>
#include <string>

#include "offsim/cost_model.hpp"
#include "offsim/env.hpp"
#include "offsim/qnetwork.hpp"

namespace offsim {

enum class RationaleTag { local_fixed, energy_min, robustness_override, q_greedy };

std::string to_string(RationaleTag t);

struct PolicyDecision {
    Action action;
    RationaleTag rationale = RationaleTag::local_fixed;
};

PolicyDecision local_policy(const State& state);
// Energy-minimal action predicted to meet the deadline at the probed (phi, q).
PolicyDecision r_agnostic_policy(const SystemParams& params, double phi_obs, double q_obs);
// R-agnostic, except frames below map_th are forced local.
PolicyDecision oracle_policy(const SystemParams& params, double phi_obs, double q_obs, double frame_map_full);
PolicyDecision drl_policy(const QNetwork& net, const SystemParams& params, const State& state);

// What a policy sees each frame: the DRL state, plus the frame's full-fusion
// mAP, which only the oracle is allowed to read.
struct Observation {
    const State& state;
    double map_full;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual PolicyDecision decide(const Observation& obs) const = 0;
};

std::unique_ptr<Policy> make_local_policy();
std::unique_ptr<Policy> make_r_agnostic_policy(SystemParams params);
std::unique_ptr<Policy> make_oracle_policy(SystemParams params);
std::unique_ptr<Policy> make_drl_policy(QNetwork net, SystemParams params);

// name is one of local, ragnostic, oracle, drl; drl requires a network.
std::unique_ptr<Policy> make_policy(const std::string& name, const SystemParams& params,
                                    const QNetwork* net = nullptr);

}  // namespace offsim
