#include "offsim/qnetwork.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "offsim/csv.hpp"

namespace offsim {

namespace {

std::vector<DenseLayer> stack(int in, const std::vector<int>& widths, bool relu_last) {
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        layers.push_back({in, widths[i], i + 1 < widths.size() || relu_last});
        in = widths[i];
    }
    return layers;
}

}  // namespace

QNetwork::QNetwork(std::size_t feature_dim, const std::vector<int>& context_hidden,
                   const std::vector<int>& state_hidden, std::size_t n_actions, InputScaling scaling)
    : scaling_(scaling) {
    context_ = stack(static_cast<int>(feature_dim), context_hidden, true);
    const int embed = context_.empty() ? static_cast<int>(feature_dim) : context_.back().out;
    std::vector<int> widths = state_hidden;
    widths.push_back(static_cast<int>(n_actions));
    state_ = stack(embed + 2, widths, false);
    build_offsets();
}

QNetwork::QNetwork(std::vector<DenseLayer> context_layers, std::vector<DenseLayer> state_layers, InputScaling scaling)
    : context_(std::move(context_layers)), state_(std::move(state_layers)), scaling_(scaling) {
    if (state_.empty()) throw std::invalid_argument("state encoder needs at least one layer");
    for (std::size_t l = 1; l < context_.size(); ++l)
        if (context_[l].in != context_[l - 1].out) throw std::invalid_argument("context encoder shape mismatch");
    if (!context_.empty() && state_.front().in != context_.back().out + 2)
        throw std::invalid_argument("state encoder input must be embedding + 2");
    for (std::size_t l = 1; l < state_.size(); ++l)
        if (state_[l].in != state_[l - 1].out) throw std::invalid_argument("state encoder shape mismatch");
    for (const auto& L : context_)
        if (L.in < 1 || L.out < 1) throw std::invalid_argument("layer sizes must be positive");
    for (const auto& L : state_)
        if (L.in < 1 || L.out < 1) throw std::invalid_argument("layer sizes must be positive");
    if (context_.empty() && state_.front().in < 3) throw std::invalid_argument("state encoder input too small");
    build_offsets();
}

void QNetwork::build_offsets() {
    offsets_.clear();
    std::size_t off = 0;
    for (std::size_t l = 0; l < total_layers(); ++l) {
        offsets_.push_back(off);
        const auto& L = layer(l);
        off += static_cast<std::size_t>(L.out) * (L.in + 1);
    }
    params_.assign(off, 0.0);
}

void QNetwork::initialize(Rng& rng) {
    for (std::size_t l = 0; l < total_layers(); ++l) {
        const auto& L = layer(l);
        const double bound = std::sqrt(6.0 / L.in);
        double* w = params_.data() + offsets_[l];
        for (int i = 0; i < L.out * L.in; ++i) w[i] = bound * (2 * rng.uniform() - 1);
        for (int i = 0; i < L.out; ++i) w[L.out * L.in + i] = 0.0;
    }
}

std::size_t QNetwork::feature_dim() const {
    return context_.empty() ? static_cast<std::size_t>(state_.front().in - 2)
                            : static_cast<std::size_t>(context_.front().in);
}

std::size_t QNetwork::n_actions() const { return static_cast<std::size_t>(state_.back().out); }

std::vector<double> QNetwork::input_vector(const State& s) const {
    if (s.features.size() != feature_dim())
        throw std::invalid_argument("state has " + std::to_string(s.features.size()) + " features, network expects " +
                                    std::to_string(feature_dim()));
    std::vector<double> x = s.features;
    x.push_back(s.phi_obs / scaling_.phi_max_mbps);
    x.push_back(s.q_obs / scaling_.q_scale_ms);
    return x;
}

std::span<const double> QNetwork::forward(const State& s, Trace& trace) const {
    const std::size_t n_layers = total_layers();
    trace.acts.resize(n_layers + 1);
    trace.acts[0] = input_vector(s);
    const std::size_t k = feature_dim();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& L = layer(l);
        // The state encoder's first layer sees [embedding, phi, q]; the
        // scaled phi and q sit at the tail of acts[0].
        std::vector<double> input_buf;
        const double* in = trace.acts[l].data();
        if (l == context_.size() && !context_.empty()) {
            input_buf = trace.acts[l];
            input_buf.push_back(trace.acts[0][k]);
            input_buf.push_back(trace.acts[0][k + 1]);
            in = input_buf.data();
        }
        auto& out = trace.acts[l + 1];
        out.assign(static_cast<std::size_t>(L.out), 0.0);
        const double* w = params_.data() + offsets_[l];
        const double* b = w + static_cast<std::size_t>(L.out) * L.in;
        for (int o = 0; o < L.out; ++o) {
            double acc = b[o];
            const double* row = w + static_cast<std::size_t>(o) * L.in;
            for (int i = 0; i < L.in; ++i) acc += row[i] * in[i];
            out[o] = (L.relu && acc < 0) ? 0.0 : acc;
        }
    }
    return trace.acts.back();
}

std::vector<double> QNetwork::forward(const State& s) const {
    Trace trace;
    const auto out = forward(s, trace);
    return {out.begin(), out.end()};
}

void QNetwork::backward(const Trace& trace, std::span<const double> d_output, std::span<double> grad) const {
    const std::size_t n_layers = total_layers();
    const std::size_t k = feature_dim();
    std::vector<double> delta(d_output.begin(), d_output.end());
    std::vector<double> d_in;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& L = layer(l);
        const auto& out = trace.acts[l + 1];
        if (L.relu)
            for (int o = 0; o < L.out; ++o)
                if (out[o] <= 0) delta[o] = 0.0;

        // Reconstruct this layer's input the same way forward() did.
        std::vector<double> input_buf;
        const double* in = trace.acts[l].data();
        if (l == context_.size() && !context_.empty()) {
            input_buf = trace.acts[l];
            input_buf.push_back(trace.acts[0][k]);
            input_buf.push_back(trace.acts[0][k + 1]);
            in = input_buf.data();
        }

        const double* w = params_.data() + offsets_[l];
        double* gw = grad.data() + offsets_[l];
        double* gb = gw + static_cast<std::size_t>(L.out) * L.in;
        d_in.assign(static_cast<std::size_t>(L.in), 0.0);
        for (int o = 0; o < L.out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            gb[o] += d;
            double* grow = gw + static_cast<std::size_t>(o) * L.in;
            const double* row = w + static_cast<std::size_t>(o) * L.in;
            for (int i = 0; i < L.in; ++i) {
                grow[i] += d * in[i];
                d_in[i] += d * row[i];
            }
        }
        if (l == 0) break;
        // Going from the state encoder into the context encoder drops the
        // phi/q slots, which are inputs rather than activations.
        if (l == context_.size()) d_in.resize(d_in.size() - 2);
        delta.swap(d_in);
    }
}

bool QNetwork::all_finite() const {
    for (const double p : params_)
        if (!std::isfinite(p)) return false;
    return true;
}

namespace {

constexpr const char* kCheckpointMagic = "offsim-qnetwork";
constexpr int kCheckpointVersion = 1;

void write_layers(std::ostringstream& out, const char* name, const std::vector<DenseLayer>& layers) {
    out << name << ' ' << layers.size() << '\n';
    for (const auto& L : layers) out << L.in << ' ' << L.out << ' ' << (L.relu ? "relu" : "linear") << '\n';
}

std::vector<DenseLayer> read_layers(std::istringstream& in, const std::string& name) {
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != name) throw std::runtime_error("checkpoint: expected '" + name + "' section");
    std::vector<DenseLayer> layers(n);
    for (auto& L : layers) {
        std::string act;
        if (!(in >> L.in >> L.out >> act) || (act != "relu" && act != "linear"))
            throw std::runtime_error("checkpoint: malformed layer in " + name);
        L.relu = act == "relu";
    }
    return layers;
}

}  // namespace

std::string checkpoint_to_string(const QNetwork& net) {
    std::ostringstream out;
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    out << "scaling " << exact(net.scaling().phi_max_mbps) << ' ' << exact(net.scaling().q_scale_ms) << '\n';
    write_layers(out, "context", net.context_layers());
    write_layers(out, "state", net.state_layers());
    out << "params " << net.param_count() << '\n';
    for (const double p : net.params()) out << exact(p) << '\n';
    return out.str();
}

QNetwork checkpoint_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kCheckpointMagic)
        throw std::runtime_error("checkpoint: not an offsim network file");
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    std::string tag;
    InputScaling scaling;
    if (!(in >> tag >> scaling.phi_max_mbps >> scaling.q_scale_ms) || tag != "scaling")
        throw std::runtime_error("checkpoint: missing scaling");
    auto context = read_layers(in, "context");
    auto state = read_layers(in, "state");
    QNetwork net;
    try {
        net = QNetwork(std::move(context), std::move(state), scaling);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("checkpoint: ") + e.what());
    }
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "params") throw std::runtime_error("checkpoint: missing params");
    if (n != net.param_count())
        throw std::runtime_error("checkpoint: " + std::to_string(n) + " params but layer shapes need " +
                                 std::to_string(net.param_count()));
    for (double& p : net.params())
        if (!(in >> p)) throw std::runtime_error("checkpoint: truncated parameter list");
    if (!net.all_finite()) throw std::runtime_error("checkpoint: non-finite parameter");
    return net;
}

void save_checkpoint(const std::string& path, const QNetwork& net) { write_text_file(path, checkpoint_to_string(net)); }

QNetwork load_checkpoint(const std::string& path) { return checkpoint_from_string(read_text_file(path)); }

}  // namespace offsim
