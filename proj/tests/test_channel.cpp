#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "offsim/channel.hpp"
#include "offsim/cost_model.hpp"
#include "offsim/csv.hpp"

using namespace offsim;

TEST_CASE("fit_rayleigh closed-form MLE") {
    const std::vector<double> xs{1.0, 2.0, 3.0};
    CHECK(fit_rayleigh(xs).sigma == doctest::Approx(std::sqrt(14.0 / 6.0)).epsilon(1e-12));
    CHECK(fit_rayleigh(xs).sigma == doctest::Approx(1.5275).epsilon(1e-4));

    const std::vector<double> constant(50, 4.2);
    CHECK(fit_rayleigh(constant).sigma == doctest::Approx(4.2 / std::sqrt(2.0)).epsilon(1e-12));

    const auto stats = fit_rayleigh_with_stats(xs);
    CHECK(stats.n == 3);
    CHECK(stats.mean == doctest::Approx(2.0));
    CHECK(stats.min == 1.0);
    CHECK(stats.max == 3.0);
}

TEST_CASE("fit_rayleigh rejects bad input") {
    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{3.0}), DomainError);
    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{1.0, -2.0}), DomainError);
}

TEST_CASE("sampling then refitting recovers sigma") {
    const ChannelModel truth{5.0, 0.0};
    Rng rng(42);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_capacity(truth, rng);
    const double sigma_hat = fit_rayleigh(xs).sigma;
    CHECK(sigma_hat >= 4.9);
    CHECK(sigma_hat <= 5.1);
    CHECK(std::abs(sigma_hat - 5.0) / 5.0 < 0.02);
}

TEST_CASE("inverse-CDF sampling") {
    const ChannelModel m{5.0, 0.1};
    CHECK(capacity_from_uniform(m, std::exp(-0.5)) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(capacity_from_uniform(m, 1.0 - 1e-17) == 0.1);
    CHECK(capacity_from_uniform(m, std::nextafter(1.0, 0.0)) == 0.1);
}

TEST_CASE("empirical mean matches the Rayleigh mean identity") {
    const ChannelModel m{5.0, 0.0};
    Rng rng(7);
    double sum = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += sample_capacity(m, rng);
    const double expected = 5.0 * std::sqrt(M_PI / 2.0);
    CHECK(expected == doctest::Approx(6.2666).epsilon(1e-4));
    CHECK(std::abs(sum / n - expected) / expected < 0.01);
}

TEST_CASE("sampling is reproducible and respects the floor") {
    const ChannelModel m{0.05, 0.1};
    Rng a(3), b(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = sample_capacity(m, a);
        CHECK(x == sample_capacity(m, b));
        CHECK(x >= 0.1);
    }
    CHECK_THROWS_AS((ChannelModel{0.0, 0.1}.validate()), DomainError);
    CHECK_THROWS_AS((ChannelModel{1.0, -0.1}.validate()), DomainError);
}

TEST_CASE("throughput trace file") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = (dir / "offsim_tp_good.txt").string();
    write_text_file(good, "# measured uplink\n1.0\n  2.0  # inline\n\n3.0\n");
    const auto xs = load_throughput_trace(good);
    REQUIRE(xs.size() == 3);
    CHECK(fit_rayleigh(xs).sigma == doctest::Approx(std::sqrt(14.0 / 6.0)));

    const auto bad = (dir / "offsim_tp_bad.txt").string();
    write_text_file(bad, "1.0\nfast\n");
    CHECK_THROWS_WITH_AS(load_throughput_trace(bad), doctest::Contains(":2:"), DomainError);
    write_text_file(bad, "1.0\n-3\n");
    CHECK_THROWS_AS(load_throughput_trace(bad), DomainError);
    CHECK_THROWS(load_throughput_trace((dir / "offsim_missing_trace.txt").string()));
}
