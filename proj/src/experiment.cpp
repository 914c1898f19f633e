#include "offsim/experiment.hpp"

#include <cmath>
#include <set>

#include "offsim/csv.hpp"

namespace offsim {

namespace {

std::string list_string(const std::vector<std::string>& v) { return join(v); }

template <typename T>
std::string int_list(const std::vector<T>& v) {
    std::vector<std::string> s;
    for (const auto x : v) s.push_back(std::to_string(x));
    return join(s);
}

std::vector<int> parse_ints(const std::vector<std::string>& items, const std::string& key) {
    std::vector<int> out;
    for (const auto& s : items) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(s, &used));
            if (used != s.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': not an integer list: '" + s + "'");
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items, const std::string& key) {
    std::vector<std::uint64_t> out;
    for (const auto& s : items) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(s, &used));
            if (used != s.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': not a seed list: '" + s + "'");
        }
    }
    return out;
}

std::size_t count(const KeyValueConfig& c, const std::string& key, std::size_t fallback) {
    const long long v = c.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError("key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "n_pipelines", "pipelines", "l_encoder_ms", "l_tail_ms", "p_local_w", "p_tx_w", "p_idle_w", "b_up_kbit",
        "b_down_kbit", "l_th_ms", "map_th", "map_th_quantile", "action_set", "offload_order", "latency_composition",
        "channel.sigma_mbps", "channel.floor_mbps", "rho", "queue_cap", "t_service_ms", "reward.p_penalty",
        "reward.energy_reference", "scenario.base", "scenario.span", "scenario.alpha", "scenario.mu",
        "scenario.z_noise", "scenario.map_noise", "scenario.k", "scenario.feature_noise", "scenario.degradation_base",
        "scenario.degradation_slope", "scenario.embedding_seed", "scenario.n_frames", "scenario.seed",
        "scenario.train_frames", "scenario.train_seed", "train.gamma", "train.lr", "train.batch_size",
        "train.buffer_capacity", "train.target_sync_steps", "train.epsilon_start", "train.epsilon_end",
        "train.epsilon_decay_steps", "train.episodes", "train.seed", "train.context_hidden", "train.state_hidden",
        "train.optimizer", "train.phi_max_mbps", "train.loss_ceiling", "train.divergence_patience", "eval.seeds"};
    return keys;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& c) {
    for (const auto& [k, v] : c.values())
        if (!known_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");

    ExperimentConfig x;
    SystemParams& s = x.env.system;
    s.n_pipelines = static_cast<int>(c.get_int("n_pipelines", s.n_pipelines));
    s.pipelines = c.get_list("pipelines", s.pipelines);
    s.l_encoder_ms = c.get_double("l_encoder_ms", s.l_encoder_ms);
    s.l_tail_ms = c.get_double("l_tail_ms", s.l_tail_ms);
    s.p_local_w = c.get_double("p_local_w", s.p_local_w);
    s.p_tx_w = c.get_double("p_tx_w", s.p_tx_w);
    s.p_idle_w = c.get_double("p_idle_w", s.p_idle_w);
    s.b_up_kbit = c.get_double("b_up_kbit", s.b_up_kbit);
    s.b_down_kbit = c.get_double("b_down_kbit", s.b_down_kbit);
    s.l_th_ms = c.get_double("l_th_ms", s.l_th_ms);
    s.map_th = c.get_double("map_th", s.map_th);
    if (c.has("map_th_quantile") && !c.get_string("map_th_quantile", "").empty())
        x.map_th_quantile = c.get_double("map_th_quantile", 0.5);
    if (c.has("action_set")) {
        s.action_set.clear();
        for (const auto& a : c.get_list("action_set", {})) s.action_set.push_back(Action::parse(a));
    }
    s.offload_order = c.get_list("offload_order", s.offload_order);
    if (c.has("latency_composition"))
        s.latency_composition = parse_latency_composition(c.get_string("latency_composition", ""));

    x.env.channel.sigma = c.get_double("channel.sigma_mbps", x.env.channel.sigma);
    x.env.channel.floor_mbps = c.get_double("channel.floor_mbps", x.env.channel.floor_mbps);
    x.env.queue.rho = c.get_double("rho", x.env.queue.rho);
    x.env.queue.cap = static_cast<int>(c.get_int("queue_cap", x.env.queue.cap));
    x.env.queue.t_service_ms = c.get_double("t_service_ms", x.env.queue.t_service_ms);
    x.env.reward.p_penalty = c.get_double("reward.p_penalty", x.env.reward.p_penalty);
    if (c.has("reward.energy_reference"))
        x.env.reward.energy_reference = parse_energy_reference(c.get_string("reward.energy_reference", ""));

    GeneratorParams& g = x.scenario;
    g.base = c.get_double("scenario.base", g.base);
    g.span = c.get_double("scenario.span", g.span);
    g.alpha = c.get_double("scenario.alpha", g.alpha);
    g.mu = c.get_double("scenario.mu", g.mu);
    g.z_noise = c.get_double("scenario.z_noise", g.z_noise);
    g.map_noise = c.get_double("scenario.map_noise", g.map_noise);
    g.k = static_cast<int>(c.get_int("scenario.k", g.k));
    g.feature_noise = c.get_double("scenario.feature_noise", g.feature_noise);
    g.degradation_base = c.get_double("scenario.degradation_base", g.degradation_base);
    g.degradation_slope = c.get_double("scenario.degradation_slope", g.degradation_slope);
    g.embedding_seed = count(c, "scenario.embedding_seed", g.embedding_seed);
    x.eval_frames = count(c, "scenario.n_frames", x.eval_frames);
    x.eval_trace_seed = count(c, "scenario.seed", x.eval_trace_seed);
    x.train_frames = count(c, "scenario.train_frames", x.train_frames);
    x.train_trace_seed = count(c, "scenario.train_seed", x.train_trace_seed);

    TrainConfig& t = x.train;
    t.gamma = c.get_double("train.gamma", t.gamma);
    t.lr = c.get_double("train.lr", t.lr);
    t.batch_size = count(c, "train.batch_size", t.batch_size);
    t.buffer_capacity = count(c, "train.buffer_capacity", t.buffer_capacity);
    t.target_sync_steps = count(c, "train.target_sync_steps", t.target_sync_steps);
    t.epsilon_start = c.get_double("train.epsilon_start", t.epsilon_start);
    t.epsilon_end = c.get_double("train.epsilon_end", t.epsilon_end);
    t.epsilon_decay_steps = count(c, "train.epsilon_decay_steps", t.epsilon_decay_steps);
    t.episodes = count(c, "train.episodes", t.episodes);
    t.seed = count(c, "train.seed", t.seed);
    if (c.has("train.context_hidden"))
        t.context_hidden = parse_ints(c.get_list("train.context_hidden", {}), "train.context_hidden");
    if (c.has("train.state_hidden"))
        t.state_hidden = parse_ints(c.get_list("train.state_hidden", {}), "train.state_hidden");
    if (c.has("train.optimizer")) t.optimizer = parse_optimizer(c.get_string("train.optimizer", ""));
    t.phi_max_mbps = c.get_double("train.phi_max_mbps", t.phi_max_mbps);
    t.loss_ceiling = c.get_double("train.loss_ceiling", t.loss_ceiling);
    t.divergence_patience = count(c, "train.divergence_patience", t.divergence_patience);

    if (c.has("eval.seeds")) x.eval_seeds = parse_seeds(c.get_list("eval.seeds", {}), "eval.seeds");
    x.validate();
    return x;
}

void ExperimentConfig::validate() const {
    env.validate();
    scenario.validate();
    train.validate();
    if (eval_frames == 0 || train_frames == 0) throw DomainError("scenario frame counts must be positive");
    if (eval_seeds.empty()) throw DomainError("eval.seeds must list at least one seed");
    if (map_th_quantile && !(*map_th_quantile >= 0 && *map_th_quantile <= 1))
        throw DomainError("map_th_quantile must lie in [0,1]");
}

KeyValueConfig ExperimentConfig::to_config() const {
    KeyValueConfig c;
    const SystemParams& s = env.system;
    c.set("n_pipelines", std::to_string(s.n_pipelines));
    c.set("pipelines", list_string(s.pipelines));
    c.set("l_encoder_ms", exact(s.l_encoder_ms));
    c.set("l_tail_ms", exact(s.l_tail_ms));
    c.set("p_local_w", exact(s.p_local_w));
    c.set("p_tx_w", exact(s.p_tx_w));
    c.set("p_idle_w", exact(s.p_idle_w));
    c.set("b_up_kbit", exact(s.b_up_kbit));
    c.set("b_down_kbit", exact(s.b_down_kbit));
    c.set("l_th_ms", exact(s.l_th_ms));
    c.set("map_th", exact(s.map_th));
    c.set("map_th_quantile", map_th_quantile ? exact(*map_th_quantile) : "");
    std::vector<std::string> actions;
    for (const auto a : s.action_set) actions.push_back(a.name());
    c.set("action_set", join(actions));
    c.set("offload_order", list_string(s.offload_order));
    c.set("latency_composition", to_string(s.latency_composition));
    c.set("channel.sigma_mbps", exact(env.channel.sigma));
    c.set("channel.floor_mbps", exact(env.channel.floor_mbps));
    c.set("rho", exact(env.queue.rho));
    c.set("queue_cap", std::to_string(env.queue.cap));
    c.set("t_service_ms", exact(env.queue.t_service_ms));
    c.set("reward.p_penalty", exact(env.reward.p_penalty));
    c.set("reward.energy_reference", to_string(env.reward.energy_reference));
    c.set("scenario.base", exact(scenario.base));
    c.set("scenario.span", exact(scenario.span));
    c.set("scenario.alpha", exact(scenario.alpha));
    c.set("scenario.mu", exact(scenario.mu));
    c.set("scenario.z_noise", exact(scenario.z_noise));
    c.set("scenario.map_noise", exact(scenario.map_noise));
    c.set("scenario.k", std::to_string(scenario.k));
    c.set("scenario.feature_noise", exact(scenario.feature_noise));
    c.set("scenario.degradation_base", exact(scenario.degradation_base));
    c.set("scenario.degradation_slope", exact(scenario.degradation_slope));
    c.set("scenario.embedding_seed", std::to_string(scenario.embedding_seed));
    c.set("scenario.n_frames", std::to_string(eval_frames));
    c.set("scenario.seed", std::to_string(eval_trace_seed));
    c.set("scenario.train_frames", std::to_string(train_frames));
    c.set("scenario.train_seed", std::to_string(train_trace_seed));
    c.set("train.gamma", exact(train.gamma));
    c.set("train.lr", exact(train.lr));
    c.set("train.batch_size", std::to_string(train.batch_size));
    c.set("train.buffer_capacity", std::to_string(train.buffer_capacity));
    c.set("train.target_sync_steps", std::to_string(train.target_sync_steps));
    c.set("train.epsilon_start", exact(train.epsilon_start));
    c.set("train.epsilon_end", exact(train.epsilon_end));
    c.set("train.epsilon_decay_steps", std::to_string(train.epsilon_decay_steps));
    c.set("train.episodes", std::to_string(train.episodes));
    c.set("train.seed", std::to_string(train.seed));
    c.set("train.context_hidden", int_list(train.context_hidden));
    c.set("train.state_hidden", int_list(train.state_hidden));
    c.set("train.optimizer", to_string(train.optimizer));
    c.set("train.phi_max_mbps", exact(train.phi_max_mbps));
    c.set("train.loss_ceiling", exact(train.loss_ceiling));
    c.set("train.divergence_patience", std::to_string(train.divergence_patience));
    c.set("eval.seeds", int_list(eval_seeds));
    return c;
}

ScenarioTrace ExperimentConfig::eval_trace() const {
    return generate_synthetic(scenario, env.system, eval_frames, eval_trace_seed);
}

ScenarioTrace ExperimentConfig::train_trace() const {
    return generate_synthetic(scenario, env.system, train_frames, train_trace_seed);
}

void ExperimentConfig::resolve_threshold(const ScenarioTrace& trace) {
    if (map_th_quantile) env.system.map_th = map_full_quantile(trace, *map_th_quantile);
}

std::string default_config_text() {
    return "# offsim defaults. Units: ms, W, kbit, Mbit/s.\n"
           "# Override with --config FILE and --set key=value (CLI > file > defaults).\n" +
           ExperimentConfig{}.to_config().dump();
}

std::vector<double> parse_grid(const std::string& text) {
    // "a,b,c" or "start:stop:step" (inclusive stop).
    std::vector<double> grid;
    const auto parts = split_list(text, ':');
    try {
        if (parts.size() == 3 && text.find(',') == std::string::npos) {
            const double start = std::stod(parts[0]), stop = std::stod(parts[1]), step = std::stod(parts[2]);
            if (!(step > 0) || stop < start) throw ConfigError("grid range must have step > 0 and stop >= start");
            const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
            for (long long i = 0; i <= n; ++i) grid.push_back(start + static_cast<double>(i) * step);
        } else {
            for (const auto& s : split_list(text)) grid.push_back(std::stod(s));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse grid '" + text + "'");
    }
    if (grid.empty()) throw ConfigError("grid is empty");
    return grid;
}

}  // namespace offsim
