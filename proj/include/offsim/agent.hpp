#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "offsim/env.hpp"
#include "offsim/qnetwork.hpp"
#include "offsim/random.hpp"

namespace offsim {

struct Transition {
    State state;
    std::size_t action = 0;
    double reward = 0;
    State next_state;
    bool terminal = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    // Uniform sampling with replacement; requires size() >= batch_size.
    std::vector<const Transition*> sample(std::size_t batch_size, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> entries_;
};

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& text);

class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, std::size_t n_params);

    void apply(std::span<double> params, std::span<const double> grad);
    double lr() const { return lr_; }

private:
    OptimizerKind kind_;
    double lr_;
    std::vector<double> m_, v_;
    long long t_ = 0;
};

struct TrainConfig {
    double gamma = 0.9;
    double lr = 1e-3;
    std::size_t batch_size = 64;
    std::size_t buffer_capacity = 100000;
    std::size_t target_sync_steps = 500;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t epsilon_decay_steps = 50000;
    std::size_t episodes = 12;
    std::uint64_t seed = 1;
    std::vector<int> context_hidden{32, 8};
    std::vector<int> state_hidden{64, 64};
    OptimizerKind optimizer = OptimizerKind::adam;
    double phi_max_mbps = 30.0;
    double loss_ceiling = 1e6;
    std::size_t divergence_patience = 1000;

    void validate() const;
    double epsilon_at(std::size_t step) const;
};

// reward if terminal, else reward + gamma * target(s')[argmax online(s')].
double ddqn_target(double reward, const State& next_state, const QNetwork& online, const QNetwork& target,
                   double gamma, bool terminal);

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean squared TD error over the taken actions; accumulates its gradient with
// respect to the online parameters into `grad` (targets are held fixed).
double td_loss_gradient(const QNetwork& online, const QNetwork& target, std::span<const Transition* const> batch,
                        double gamma, std::span<double> grad);

// One optimizer step on the mean squared TD error of the taken actions.
// Returns the loss before the step.
double train_step(QNetwork& online, const QNetwork& target, std::span<const Transition* const> batch,
                  Optimizer& optimizer, double gamma);

// Greedy argmax with ties to the lower index (lower i, the safer action).
std::size_t greedy_action(std::span<const double> q_values);

// Epsilon-greedy over the network's actions.
std::size_t act(const QNetwork& net, const State& state, double epsilon, Rng& rng);

// What train() needs from an environment; action indices refer to the
// action set order.
class TrainingEnvironment {
public:
    struct Feedback {
        State next_state;
        double reward = 0;
        bool terminal = false;
    };

    virtual ~TrainingEnvironment() = default;
    virtual State reset(std::uint64_t seed) = 0;
    virtual Feedback step(std::size_t action_index) = 0;
    virtual std::size_t n_actions() const = 0;
    virtual std::size_t feature_dim() const = 0;
    virtual double q_scale_ms() const { return 1.0; }
};

class OffloadTrainingEnv : public TrainingEnvironment {
public:
    OffloadTrainingEnv(const ScenarioTrace& trace, EnvSpec spec) : env_(trace, std::move(spec)) {}

    State reset(std::uint64_t seed) override { return env_.reset(seed); }
    Feedback step(std::size_t action_index) override;
    std::size_t n_actions() const override { return env_.spec().system.action_set.size(); }
    std::size_t feature_dim() const override { return env_.trace().k; }
    double q_scale_ms() const override { return env_.spec().system.l_th_ms; }

private:
    OffloadEnv env_;
};

struct EpisodeLog {
    std::size_t episode = 0;
    double mean_reward = 0;
    double mean_loss = 0;
    double epsilon = 0;
    std::size_t steps = 0;
};

struct TrainResult {
    QNetwork network;
    std::vector<EpisodeLog> log;
    std::size_t total_steps = 0;
    std::size_t target_syncs = 0;
};

TrainResult train(TrainingEnvironment& env, const TrainConfig& config);

// episode,mean_reward,mean_loss,epsilon
std::string training_log_csv(const std::vector<EpisodeLog>& log);

}  // namespace offsim
