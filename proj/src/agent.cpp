#include "offsim/agent.hpp"

#include <algorithm>
#include <cmath>

#include "offsim/csv.hpp"

namespace offsim {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    entries_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (entries_.size() < capacity_) {
        entries_.push_back(std::move(t));
    } else {
        entries_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0 || entries_.size() < batch_size)
        throw std::logic_error("replay buffer holds fewer transitions than the batch size");
    std::vector<const Transition*> batch(batch_size);
    for (auto& p : batch) p = &entries_[rng.below(entries_.size())];
    return batch;
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "adam") return OptimizerKind::adam;
    if (text == "sgd") return OptimizerKind::sgd;
    throw DomainError("train.optimizer must be adam or sgd, got '" + text + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double lr, std::size_t n_params) : kind_(kind), lr_(lr) {
    if (kind_ == OptimizerKind::adam) {
        m_.assign(n_params, 0.0);
        v_.assign(n_params, 0.0);
    }
}

void Optimizer::apply(std::span<double> params, std::span<const double> grad) {
    if (kind_ == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
        return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1 * m_[i] + (1 - beta1) * grad[i];
        v_[i] = beta2 * v_[i] + (1 - beta2) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
}

void TrainConfig::validate() const {
    if (!(gamma >= 0 && gamma < 1)) throw DomainError("train.gamma must lie in [0,1)");
    if (!(lr > 0)) throw DomainError("train.lr must be > 0");
    if (batch_size == 0 || buffer_capacity == 0 || target_sync_steps == 0 || episodes == 0)
        throw DomainError("train counts must be positive");
    if (batch_size > buffer_capacity) throw DomainError("train.batch_size exceeds train.buffer_capacity");
    if (!(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_end >= 0 && epsilon_end <= epsilon_start))
        throw DomainError("epsilon schedule must satisfy 0 <= end <= start <= 1");
    if (!(phi_max_mbps > 0)) throw DomainError("train.phi_max_mbps must be > 0");
    for (const int h : context_hidden)
        if (h < 1) throw DomainError("hidden sizes must be positive");
    for (const int h : state_hidden)
        if (h < 1) throw DomainError("hidden sizes must be positive");
}

double TrainConfig::epsilon_at(std::size_t step) const {
    if (epsilon_decay_steps == 0 || step >= epsilon_decay_steps) return epsilon_end;
    const double frac = static_cast<double>(step) / static_cast<double>(epsilon_decay_steps);
    return epsilon_start + frac * (epsilon_end - epsilon_start);
}

std::size_t greedy_action(std::span<const double> q) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

double ddqn_target(double reward, const State& next_state, const QNetwork& online, const QNetwork& target,
                   double gamma, bool terminal) {
    if (terminal) return reward;
    const auto q_online = online.forward(next_state);
    const auto q_target = target.forward(next_state);
    return reward + gamma * q_target[greedy_action(q_online)];
}

double td_loss_gradient(const QNetwork& online, const QNetwork& target, std::span<const Transition* const> batch,
                        double gamma, std::span<double> grad) {
    if (batch.empty()) throw std::invalid_argument("TD loss needs a non-empty batch");
    const double n = static_cast<double>(batch.size());
    std::vector<double> d_out(online.n_actions(), 0.0);
    QNetwork::Trace trace;
    double loss = 0;
    for (const Transition* tr : batch) {
        const double y = ddqn_target(tr->reward, tr->next_state, online, target, gamma, tr->terminal);
        const auto q = online.forward(tr->state, trace);
        const double err = q[tr->action] - y;
        loss += err * err;
        std::fill(d_out.begin(), d_out.end(), 0.0);
        d_out[tr->action] = 2.0 * err / n;
        online.backward(trace, d_out, grad);
    }
    return loss / n;
}

double train_step(QNetwork& online, const QNetwork& target, std::span<const Transition* const> batch,
                  Optimizer& optimizer, double gamma) {
    std::vector<double> grad(online.param_count(), 0.0);
    const double loss = td_loss_gradient(online, target, batch, gamma, grad);
    if (!std::isfinite(loss)) throw TrainingDiverged("non-finite TD loss");
    optimizer.apply(online.params(), grad);
    if (!online.all_finite()) throw TrainingDiverged("non-finite network weights after update");
    return loss;
}

std::size_t act(const QNetwork& net, const State& state, double epsilon, Rng& rng) {
    if (rng.uniform() < epsilon) return static_cast<std::size_t>(rng.below(net.n_actions()));
    const auto q = net.forward(state);
    return greedy_action(q);
}

TrainingEnvironment::Feedback OffloadTrainingEnv::step(std::size_t action_index) {
    const auto& actions = env_.spec().system.action_set;
    const StepResult r = env_.step(actions.at(action_index));
    return {r.next_state, r.reward, r.terminal};
}

TrainResult train(TrainingEnvironment& env, const TrainConfig& config) {
    config.validate();
    Rng init_rng(derive_seed(config.seed, 0));
    Rng act_rng(derive_seed(config.seed, 1));
    Rng replay_rng(derive_seed(config.seed, 2));

    QNetwork online(env.feature_dim(), config.context_hidden, config.state_hidden, env.n_actions(),
                    InputScaling{config.phi_max_mbps, env.q_scale_ms()});
    online.initialize(init_rng);
    QNetwork target = online;
    Optimizer optimizer(config.optimizer, config.lr, online.param_count());
    ReplayBuffer buffer(config.buffer_capacity);

    TrainResult result;
    std::size_t step = 0;
    std::size_t over_ceiling = 0;
    for (std::size_t episode = 0; episode < config.episodes; ++episode) {
        State s = env.reset(derive_seed(config.seed, 1000 + episode));
        double reward_sum = 0, loss_sum = 0;
        std::size_t steps = 0, updates = 0;
        bool terminal = false;
        while (!terminal) {
            const double eps = config.epsilon_at(step);
            const std::size_t a = act(online, s, eps, act_rng);
            auto fb = env.step(a);
            terminal = fb.terminal;
            reward_sum += fb.reward;
            buffer.push(Transition{s, a, fb.reward, fb.next_state, fb.terminal});
            s = std::move(fb.next_state);
            ++step;
            ++steps;

            if (buffer.size() >= config.batch_size) {
                const auto batch = buffer.sample(config.batch_size, replay_rng);
                const double loss = train_step(online, target, batch, optimizer, config.gamma);
                loss_sum += loss;
                ++updates;
                over_ceiling = loss > config.loss_ceiling ? over_ceiling + 1 : 0;
                if (over_ceiling >= config.divergence_patience)
                    throw TrainingDiverged("TD loss above " + exact(config.loss_ceiling) + " for " +
                                           std::to_string(over_ceiling) + " consecutive updates");
            }
            if (step % config.target_sync_steps == 0) {
                target = online;
                ++result.target_syncs;
            }
        }
        result.log.push_back(EpisodeLog{episode, reward_sum / static_cast<double>(steps),
                                        updates ? loss_sum / static_cast<double>(updates) : 0.0,
                                        config.epsilon_at(step), steps});
    }
    result.total_steps = step;
    result.network = std::move(online);
    return result;
}

std::string training_log_csv(const std::vector<EpisodeLog>& log) {
    std::string out = "episode,mean_reward,loss,epsilon\n";
    for (const auto& e : log)
        out += std::to_string(e.episode) + "," + fixed(e.mean_reward, 9) + "," + fixed(e.mean_loss, 9) + "," +
               fixed(e.epsilon, 6) + "\n";
    return out;
}

}  // namespace offsim
