#include <doctest.h>

#include <cmath>
#include <limits>

#include "offsim/cost_model.hpp"
#include "offsim/random.hpp"

using namespace offsim;

namespace {

SystemParams defaults() { return SystemParams{}; }

SystemParams no_downlink() {
    SystemParams p;
    p.b_down_kbit = 0;
    return p;
}

// Independent oracle: walk the pipelines one by one and add up stage times.
double local_by_stages(const SystemParams& p, int offloaded) {
    double total = 0;
    for (int pipe = 0; pipe < p.n_pipelines; ++pipe) {
        total += p.l_encoder_ms;
        const bool stays_local = pipe >= offloaded;
        if (stays_local) total += p.l_tail_ms;
    }
    return total;
}

// Closed-form rate at which offload_i exactly meets the deadline (overlapped,
// offload branch binding).
double analytic_crossover(const SystemParams& p, int i, double q) {
    return i * (p.b_up_kbit + p.b_down_kbit) / (p.l_th_ms - p.n_pipelines * p.l_encoder_ms - q);
}

}  // namespace

TEST_CASE("defaults satisfy the parameter invariants") {
    CHECK_NOTHROW(defaults().validate());
    SystemParams p;
    p.action_set = {Action{0}, Action{2}};
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = defaults();
    p.offload_order = {"camera_left", "camera_right", "radar", "lidar"};
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = defaults();
    p.map_th = 1.5;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.map_th = -0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.map_th = 0.0;  // boundary audits need both ends
    CHECK_NOTHROW(p.validate());
    p = defaults();
    p.l_tail_ms = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("local subsets follow the offload order") {
    const auto p = defaults();
    CHECK(p.local_subset_id(Action{0}) == "radar_lidar_camera_left_camera_right");
    CHECK(p.local_subset_id(Action{2}) == "radar_lidar");
    CHECK(p.local_subset_id(Action{3}) == "radar");
}

TEST_CASE("latency_local matches hardware constants and the stage-sum oracle") {
    const auto p = defaults();
    CHECK(latency_local(p, Action{0}) == doctest::Approx(68.12).epsilon(1e-12));
    CHECK(latency_local(p, Action{3}) == doctest::Approx(28.37).epsilon(1e-12));
    for (int i = 0; i < p.n_pipelines; ++i)
        CHECK(latency_local(p, Action{i}) == doctest::Approx(local_by_stages(p, i)).epsilon(1e-12));

    SystemParams one;
    one.n_pipelines = 1;
    one.pipelines = {"radar"};
    one.offload_order = {};
    one.action_set = {Action{0}};
    CHECK(latency_local(one, Action{0}) == doctest::Approx(17.03).epsilon(1e-12));

    CHECK_THROWS_AS(latency_local(p, Action{4}), DomainError);
    CHECK_THROWS_AS(latency_local(p, Action{-1}), DomainError);
}

TEST_CASE("local latency drops by exactly one tail per offloaded pipeline") {
    const auto p = defaults();
    for (int i = 0; i + 1 < p.n_pipelines; ++i)
        CHECK(latency_local(p, Action{i}) - latency_local(p, Action{i + 1}) == doctest::Approx(p.l_tail_ms));
}

TEST_CASE("energy_local") {
    auto p = defaults();
    CHECK(std::abs(energy_local(p, Action{0}) - 0.48) <= 0.005);
    CHECK(energy_local(p, Action{3}) == doctest::Approx(28.37 * 7.046 / 1000).epsilon(1e-12));
    p.p_local_w = 0;
    CHECK(energy_local(p, Action{2}) == 0.0);
}

TEST_CASE("comm_cost") {
    const auto p = defaults();
    const auto c3 = comm_cost(p, Action{3}, 8, 8);
    CHECK(c3.l_tx_ms == doctest::Approx(34.71));
    CHECK(c3.e_tx_j == doctest::Approx(34.71 * 1.3 / 1000));
    CHECK(c3.l_rx_ms == doctest::Approx(3 * 4.0 / 8));
    CHECK(comm_cost(p, Action{2}, 4, 4).l_tx_ms == doctest::Approx(46.28));

    const auto c0 = comm_cost(p, Action{0}, 3, 7);
    CHECK(c0.l_tx_ms == 0.0);
    CHECK(c0.e_tx_j == 0.0);
    CHECK(c0.l_rx_ms == 0.0);
    CHECK(c0.e_rx_j == 0.0);

    CHECK_THROWS_AS(comm_cost(p, Action{2}, 0, 8), DomainError);
    CHECK_THROWS_AS(comm_cost(p, Action{2}, 8, -1), DomainError);
}

TEST_CASE("total_cost under overlapped composition") {
    const auto p = no_downlink();
    const auto c3 = total_cost(p, Action{3}, 8, 8, 15);
    CHECK(c3.l_total_ms == doctest::Approx(std::max(28.37, 15.12 + 34.71 + 15)));
    CHECK(c3.l_total_ms == doctest::Approx(64.83));
    CHECK(meets_deadline(p, c3.l_total_ms));

    const auto c2 = total_cost(p, Action{2}, 4.9, 4.9, 15);
    CHECK(c2.l_total_ms == doctest::Approx(15.12 + 2 * 92.56 / 4.9 + 15));
    CHECK(c2.l_total_ms == doctest::Approx(67.90).epsilon(1e-4));
    CHECK(meets_deadline(p, c2.l_total_ms));

    // Local branch binds when the network is fast.
    const auto fast = total_cost(p, Action{2}, 1e9, 1e9, 0);
    CHECK(fast.l_total_ms == doctest::Approx(41.62));
}

TEST_CASE("offload_0 cost equals the pure-local hardware row") {
    const auto p = defaults();
    for (const double phi : {0.5, 8.0, 1000.0})
        for (const double q : {0.0, 15.0, 300.0}) {
            const auto c = total_cost(p, Action{0}, phi, phi, q);
            CHECK(c.l_total_ms == doctest::Approx(68.12));
            CHECK(std::abs(c.e_total_j - 0.48) <= 0.005);
            CHECK(c.l_tx_ms == 0.0);
            CHECK(c.l_server_ms == 0.0);
            CHECK(c.l_rx_ms == 0.0);
            CHECK(c.e_tx_j == 0.0);
            CHECK(c.e_idle_j == 0.0);
            CHECK(c.e_rx_j == 0.0);
            CHECK(meets_deadline(p, c.l_total_ms));
        }
}

TEST_CASE("energy components add up exactly and additive latency is the sum") {
    auto p = defaults();
    p.p_idle_w = 0.9;
    Rng rng(11);
    for (const auto comp : {LatencyComposition::additive, LatencyComposition::overlapped}) {
        p.latency_composition = comp;
        for (int trial = 0; trial < 200; ++trial) {
            const Action a = p.action_set[rng.below(p.action_set.size())];
            const double phi = 0.5 + 20 * rng.uniform();
            const double q = 60 * rng.uniform();
            const auto c = total_cost(p, a, phi, phi, q);
            CHECK(c.e_total_j == c.e_local_j + c.e_tx_j + c.e_idle_j + c.e_rx_j);
            const double remote = c.l_tx_ms + c.l_server_ms + c.l_rx_ms;
            if (comp == LatencyComposition::additive) {
                CHECK(c.l_total_ms == doctest::Approx(c.l_local_ms + remote));
                CHECK(c.e_idle_j == doctest::Approx(0.9 * remote / 1000));
            } else if (a.offloaded > 0) {
                const double enc = p.n_pipelines * p.l_encoder_ms;
                CHECK(c.l_total_ms == doctest::Approx(std::max(c.l_local_ms, enc + remote)));
                CHECK(c.e_idle_j == doctest::Approx(0.9 * std::max(0.0, remote - (c.l_local_ms - enc)) / 1000));
            }
        }
    }
    CHECK_THROWS_AS(total_cost(p, Action{2}, 8, 8, -1), DomainError);
}

TEST_CASE("feasible_actions") {
    const auto p = defaults();
    CHECK(feasible_actions(p, 2, 2, 15) == std::vector<Action>{{0}});
    CHECK(feasible_actions(p, 8, 8, 15) == std::vector<Action>{{0}, {2}, {3}});
    CHECK(feasible_actions(p, 1e12, 1e12, 0) == p.action_set);
}

TEST_CASE("min_energy_feasible") {
    CHECK(min_energy_feasible(defaults(), 8, 8, 15) == Action{3});
    CHECK(min_energy_feasible(defaults(), 2, 2, 15) == Action{0});
    // The 5 Mbit/s example needs b_down = 0: with 4 kbit of downlink per
    // pipeline offload_2 only becomes feasible above 5.08 Mbit/s.
    CHECK(min_energy_feasible(no_downlink(), 5, 5, 15) == Action{2});
    CHECK(min_energy_feasible(defaults(), 5, 5, 15) == Action{0});
}

TEST_CASE("min_energy_feasible breaks exact ties toward the smaller i") {
    auto p = defaults();
    // Zero power makes every action cost 0 J.
    p.p_local_w = 0;
    p.p_tx_w = 0;
    CHECK(min_energy_feasible(p, 1e9, 1e9, 0) == Action{0});
    p.action_set = {Action{2}, Action{3}};
    CHECK(min_energy_feasible(p, 1e9, 1e9, 0) == Action{2});
}

TEST_CASE("energy is non-increasing in i among feasible actions") {
    const auto p = defaults();
    for (double phi = 2; phi <= 30; phi += 0.25)
        for (double q = 0; q <= 40; q += 2.5) {
            const auto feas = feasible_actions(p, phi, phi, q);
            for (std::size_t k = 1; k < feas.size(); ++k)
                CHECK(total_cost(p, feas[k], phi, phi, q).e_total_j <=
                      total_cost(p, feas[k - 1], phi, phi, q).e_total_j);
        }
}

TEST_CASE("feasibility is monotone in channel rate and queue delay") {
    const auto p = defaults();
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const double phi = 0.5 + 15 * rng.uniform(), q = 50 * rng.uniform();
        const double phi2 = phi + 10 * rng.uniform(), q2 = q * rng.uniform();
        for (const Action a : feasible_actions(p, phi, phi, q)) {
            const auto better = feasible_actions(p, phi2, phi2, q2);
            CHECK(std::find(better.begin(), better.end(), a) != better.end());
        }
    }
}

TEST_CASE("crossover rates: brute-force scan agrees with the closed form") {
    for (const auto& p : {defaults(), no_downlink()}) {
        auto first_feasible = [&](int i) {
            for (double phi = 0.001; phi < 50; phi += 0.001)
                if (meets_deadline(p, total_cost(p, Action{i}, phi, phi, 15).l_total_ms)) return phi;
            return std::numeric_limits<double>::infinity();
        };
        const double c2 = first_feasible(2), c3 = first_feasible(3);
        CHECK(c2 == doctest::Approx(analytic_crossover(p, 2, 15)).epsilon(1e-3));
        CHECK(c3 == doctest::Approx(analytic_crossover(p, 3, 15)).epsilon(1e-3));
        CHECK(c3 > c2);
    }
    const auto p = no_downlink();
    CHECK(analytic_crossover(p, 2, 15) > 4.0);
    CHECK(analytic_crossover(p, 2, 15) <= 5.0);
    CHECK(analytic_crossover(p, 3, 15) > 7.0);
    CHECK(analytic_crossover(p, 3, 15) <= 7.5);
}

TEST_CASE("action parsing") {
    CHECK(Action::parse("offload_3") == Action{3});
    CHECK(Action::parse("2") == Action{2});
    CHECK(Action{2}.name() == "offload_2");
    CHECK_THROWS_AS(Action::parse("offload_x"), DomainError);
    CHECK(parse_latency_composition("additive") == LatencyComposition::additive);
    CHECK_THROWS_AS(parse_latency_composition("parallel"), DomainError);
}
