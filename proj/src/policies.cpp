#include "offsim/policies.hpp"

#include <stdexcept>

#include "offsim/agent.hpp"

namespace offsim {

std::string to_string(RationaleTag t) {
    switch (t) {
        case RationaleTag::local_fixed: return "local_fixed";
        case RationaleTag::energy_min: return "energy_min";
        case RationaleTag::robustness_override: return "robustness_override";
        case RationaleTag::q_greedy: return "q_greedy";
    }
    return "?";
}

PolicyDecision local_policy(const State&) { return {Action{0}, RationaleTag::local_fixed}; }

PolicyDecision r_agnostic_policy(const SystemParams& params, double phi_obs, double q_obs) {
    return {min_energy_feasible(params, phi_obs, phi_obs, q_obs), RationaleTag::energy_min};
}

PolicyDecision oracle_policy(const SystemParams& params, double phi_obs, double q_obs, double frame_map_full) {
    if (frame_map_full < params.map_th) return {Action{0}, RationaleTag::robustness_override};
    return r_agnostic_policy(params, phi_obs, q_obs);
}

PolicyDecision drl_policy(const QNetwork& net, const SystemParams& params, const State& state) {
    if (net.n_actions() != params.action_set.size())
        throw std::invalid_argument("network has " + std::to_string(net.n_actions()) + " outputs but the action set has " +
                                    std::to_string(params.action_set.size()) + " actions");
    const auto q = net.forward(state);
    return {params.action_set[greedy_action(q)], RationaleTag::q_greedy};
}

namespace {

class LocalPolicy final : public Policy {
public:
    std::string name() const override { return "local"; }
    PolicyDecision decide(const Observation& obs) const override { return local_policy(obs.state); }
};

class RAgnosticPolicy final : public Policy {
public:
    explicit RAgnosticPolicy(SystemParams p) : params_(std::move(p)) {}
    std::string name() const override { return "ragnostic"; }
    PolicyDecision decide(const Observation& obs) const override {
        return r_agnostic_policy(params_, obs.state.phi_obs, obs.state.q_obs);
    }

private:
    SystemParams params_;
};

class OraclePolicy final : public Policy {
public:
    explicit OraclePolicy(SystemParams p) : params_(std::move(p)) {}
    std::string name() const override { return "oracle"; }
    PolicyDecision decide(const Observation& obs) const override {
        return oracle_policy(params_, obs.state.phi_obs, obs.state.q_obs, obs.map_full);
    }

private:
    SystemParams params_;
};

class DrlPolicy final : public Policy {
public:
    DrlPolicy(QNetwork net, SystemParams p) : net_(std::move(net)), params_(std::move(p)) {
        if (net_.n_actions() != params_.action_set.size())
            throw std::invalid_argument("checkpoint action count does not match the action set");
    }
    std::string name() const override { return "drl"; }
    PolicyDecision decide(const Observation& obs) const override { return drl_policy(net_, params_, obs.state); }

private:
    QNetwork net_;
    SystemParams params_;
};

}  // namespace

std::unique_ptr<Policy> make_local_policy() { return std::make_unique<LocalPolicy>(); }
std::unique_ptr<Policy> make_r_agnostic_policy(SystemParams p) { return std::make_unique<RAgnosticPolicy>(std::move(p)); }
std::unique_ptr<Policy> make_oracle_policy(SystemParams p) { return std::make_unique<OraclePolicy>(std::move(p)); }
std::unique_ptr<Policy> make_drl_policy(QNetwork net, SystemParams p) {
    return std::make_unique<DrlPolicy>(std::move(net), std::move(p));
}

std::unique_ptr<Policy> make_policy(const std::string& name, const SystemParams& params, const QNetwork* net) {
    if (name == "local") return make_local_policy();
    if (name == "ragnostic") return make_r_agnostic_policy(params);
    if (name == "oracle") return make_oracle_policy(params);
    if (name == "drl") {
        if (!net) throw std::invalid_argument("policy drl requires a checkpoint");
        return make_drl_policy(*net, params);
    }
    throw std::invalid_argument("unknown policy '" + name + "' (expected local, ragnostic, oracle or drl)");
}

}  // namespace offsim
