#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "offsim/qnetwork.hpp"

using namespace offsim;

namespace {

State state_of(std::vector<double> f, double phi, double q) { return State{std::move(f), phi, q}; }

State random_state(Rng& rng, std::size_t k) {
    State s;
    for (std::size_t j = 0; j < k; ++j) s.features.push_back(2 * rng.uniform() - 1);
    s.phi_obs = 30 * rng.uniform();
    s.q_obs = 60 * rng.uniform();
    return s;
}

// Central-difference oracle for d(sum_a c_a Q_a)/d(theta).
std::vector<double> numeric_gradient(QNetwork net, const State& s, const std::vector<double>& c, double h) {
    std::vector<double> g(net.param_count());
    auto objective = [&] {
        const auto q = net.forward(s);
        double v = 0;
        for (std::size_t a = 0; a < q.size(); ++a) v += c[a] * q[a];
        return v;
    };
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double saved = net.params()[i];
        net.params()[i] = saved + h;
        const double up = objective();
        net.params()[i] = saved - h;
        const double down = objective();
        net.params()[i] = saved;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("default shape") {
    const QNetwork net(16, {32, 8}, {64, 64}, 3);
    CHECK(net.feature_dim() == 16);
    CHECK(net.n_actions() == 3);
    REQUIRE(net.context_layers().size() == 2);
    CHECK(net.context_layers()[1].out == 8);
    REQUIRE(net.state_layers().size() == 3);
    CHECK(net.state_layers()[0].in == 10);
    CHECK_FALSE(net.state_layers().back().relu);
    CHECK(net.param_count() == (16 * 32 + 32) + (32 * 8 + 8) + (10 * 64 + 64) + (64 * 64 + 64) + (64 * 3 + 3));
}

TEST_CASE("zero network outputs zeros and forward is pure") {
    QNetwork net(4, {5}, {6}, 3);
    const State s = state_of({1, -2, 3, 0.5}, 10, 20);
    CHECK(net.forward(s) == std::vector<double>(3, 0.0));
    Rng rng(1);
    net.initialize(rng);
    CHECK(net.forward(s) == net.forward(s));
}

TEST_CASE("hand-computed single-layer forward pass") {
    // No contextual encoder; one linear layer over [f, phi/30, q/68.12].
    QNetwork net({}, {DenseLayer{3, 2, false}}, InputScaling{30.0, 68.12});
    const std::vector<double> w{1, 2, 3, -1, 0.5, 0, 0.1, -0.2};
    std::copy(w.begin(), w.end(), net.params().begin());
    const auto q = net.forward(state_of({2.0}, 15.0, 34.06));
    CHECK(q[0] == doctest::Approx(0.1 + 2 * 1 + 0.5 * 2 + 0.5 * 3));
    CHECK(q[1] == doctest::Approx(-0.2 - 2 + 0.25));
}

TEST_CASE("dimension mismatch is rejected") {
    const QNetwork net(4, {5}, {6}, 3);
    CHECK_THROWS_AS(net.forward(state_of({1, 2}, 1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(QNetwork({DenseLayer{4, 5, true}}, {DenseLayer{6, 3, false}}, {}), std::invalid_argument);
}

TEST_CASE("backprop agrees with central differences") {
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t k = 2 + rng.below(4);
        QNetwork net(k, {static_cast<int>(2 + rng.below(5)), static_cast<int>(2 + rng.below(3))},
                     {static_cast<int>(2 + rng.below(6))}, 2 + rng.below(3));
        net.initialize(rng);
        for (double& p : net.params()) p += 0.1 * (2 * rng.uniform() - 1);  // non-zero biases
        const State s = random_state(rng, k);
        std::vector<double> c(net.n_actions());
        for (auto& x : c) x = 2 * rng.uniform() - 1;

        QNetwork::Trace trace;
        net.forward(s, trace);
        std::vector<double> grad(net.param_count(), 0.0);
        net.backward(trace, c, grad);
        const auto numeric = numeric_gradient(net, s, c, 1e-6);
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double scale = std::max({std::abs(grad[i]), std::abs(numeric[i]), 1e-6});
            CHECK(std::abs(grad[i] - numeric[i]) / scale < 1e-4);
        }
    }
}

TEST_CASE("a constant shift of the output biases never changes the argmax") {
    Rng rng(9);
    QNetwork net(3, {4}, {5}, 3);
    net.initialize(rng);
    const std::size_t n_layers = net.context_layers().size() + net.state_layers().size();
    const auto& last = net.state_layers().back();
    const std::size_t bias_off = net.layer_offset(n_layers - 1) + static_cast<std::size_t>(last.out) * last.in;
    for (int trial = 0; trial < 50; ++trial) {
        const State s = random_state(rng, 3);
        const auto before = net.forward(s);
        QNetwork shifted = net;
        for (int a = 0; a < last.out; ++a) shifted.params()[bias_off + a] += 3.7;
        const auto after = shifted.forward(s);
        CHECK(std::max_element(before.begin(), before.end()) - before.begin() ==
              std::max_element(after.begin(), after.end()) - after.begin());
    }
}

TEST_CASE("checkpoint round trip and validation") {
    Rng rng(3);
    QNetwork net(5, {6, 3}, {7}, 3, InputScaling{25.0, 70.0});
    net.initialize(rng);
    const auto text = checkpoint_to_string(net);
    const QNetwork back = checkpoint_from_string(text);
    CHECK(back.param_count() == net.param_count());
    CHECK(std::equal(back.params().begin(), back.params().end(), net.params().begin()));
    CHECK(back.scaling().phi_max_mbps == 25.0);
    CHECK(checkpoint_to_string(back) == text);

    CHECK_THROWS(checkpoint_from_string("something else 1\n"));
    std::string wrong_version = text;
    wrong_version.replace(wrong_version.find(" 1\n"), 3, " 9\n");
    CHECK_THROWS_WITH(checkpoint_from_string(wrong_version), doctest::Contains("version"));
    // Break the declared shape: the parameter count no longer matches.
    std::string bad_shape = text;
    bad_shape.replace(bad_shape.find("5 6 relu"), 8, "5 9 relu");
    CHECK_THROWS(checkpoint_from_string(bad_shape));
    CHECK_THROWS(checkpoint_from_string(text.substr(0, text.size() / 2)));
}
