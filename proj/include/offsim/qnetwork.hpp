#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "offsim/env.hpp"
#include "offsim/random.hpp"

namespace offsim {

struct DenseLayer {
    int in = 0;
    int out = 0;
    bool relu = true;
};

// How a State is presented to the network: phi / phi_max, q / q_scale.
struct InputScaling {
    double phi_max_mbps = 30.0;
    double q_scale_ms = 68.12;
};

// Contextual encoder (features -> embedding) followed by a state encoder
// ([embedding, phi, q] -> one value per action). All parameters live in one
// flat vector, weights row-major (out x in) then biases, layer by layer.
class QNetwork {
public:
    QNetwork() = default;
    // Standard shape: ReLU everywhere except the output layer.
    QNetwork(std::size_t feature_dim, const std::vector<int>& context_hidden, const std::vector<int>& state_hidden,
             std::size_t n_actions, InputScaling scaling = {});
    // Arbitrary layer stacks; used by checkpoints and tests.
    QNetwork(std::vector<DenseLayer> context_layers, std::vector<DenseLayer> state_layers, InputScaling scaling);

    // He-uniform weights, zero biases.
    void initialize(Rng& rng);

    std::size_t feature_dim() const;
    std::size_t n_actions() const;
    std::size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    const std::vector<DenseLayer>& context_layers() const { return context_; }
    const std::vector<DenseLayer>& state_layers() const { return state_; }
    const InputScaling& scaling() const { return scaling_; }

    // Index of the first weight of layer `l` counted over context then state layers.
    std::size_t layer_offset(std::size_t l) const { return offsets_.at(l); }

    std::vector<double> input_vector(const State& s) const;

    std::vector<double> forward(const State& s) const;

    // Forward pass that keeps activations for backward().
    struct Trace {
        std::vector<std::vector<double>> acts;  // acts[0] = network input; acts[l+1] = output of layer l
    };
    std::span<const double> forward(const State& s, Trace& trace) const;

    // Adds d(output)/d(params) . d_output into `grad` (same layout as params()).
    void backward(const Trace& trace, std::span<const double> d_output, std::span<double> grad) const;

    bool all_finite() const;

private:
    void build_offsets();
    std::size_t total_layers() const { return context_.size() + state_.size(); }
    const DenseLayer& layer(std::size_t l) const {
        return l < context_.size() ? context_[l] : state_[l - context_.size()];
    }

    std::vector<DenseLayer> context_;
    std::vector<DenseLayer> state_;
    InputScaling scaling_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

// Versioned text checkpoint: layer shapes, scaling, row-major weights.
std::string checkpoint_to_string(const QNetwork& net);
QNetwork checkpoint_from_string(const std::string& text);
void save_checkpoint(const std::string& path, const QNetwork& net);
QNetwork load_checkpoint(const std::string& path);

}  // namespace offsim
