#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "offsim/csv.hpp"
#include "offsim/scenario.hpp"

using namespace offsim;

namespace {

const SystemParams kParams{};

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

double lag1_autocorrelation(const ScenarioTrace& t) {
    const double mean = mean_map_full(t);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = t.frames[i].map_full - mean;
        den += d * d;
        if (i + 1 < t.size()) num += d * (t.frames[i + 1].map_full - mean);
    }
    return num / den;
}

}  // namespace

TEST_CASE("partial keys follow the action set") {
    CHECK(partial_keys(kParams) == std::vector<std::string>{"radar_lidar", "radar"});
}

TEST_CASE("degenerate generator gives a constant easy scene") {
    GeneratorParams g;
    g.alpha = 0;
    g.mu = 0;
    g.z_noise = 0;
    g.map_noise = 0;
    const auto t = generate_synthetic(g, kParams, 50, 1);
    for (const auto& f : t.frames) CHECK(f.map_full == doctest::Approx(g.base));
}

TEST_CASE("default generator statistics") {
    const auto t = generate_synthetic(GeneratorParams{}, kParams, 10000, 2024);
    CHECK(t.size() == 10000);
    CHECK(t.k == 16);
    const double mean = mean_map_full(t);
    CHECK(mean >= 0.55);
    CHECK(mean <= 0.75);
    CHECK(lag1_autocorrelation(t) >= 0.8);
}

TEST_CASE("fusing more pipelines never lowers mAP") {
    for (const std::uint64_t seed : {1u, 2u, 3u, 99u}) {
        const auto t = generate_synthetic(GeneratorParams{}, kParams, 3000, seed);
        for (const auto& f : t.frames) {
            CHECK(f.map_partial.at("radar") <= f.map_partial.at("radar_lidar"));
            CHECK(f.map_partial.at("radar_lidar") <= f.map_full);
            CHECK(f.map_full >= 0.0);
            CHECK(f.map_full <= 1.0);
            CHECK(f.map_partial.at("radar") >= 0.0);
        }
    }
}

TEST_CASE("generator is deterministic and shares its embedding across seeds") {
    GeneratorParams g;
    g.feature_noise = 0;
    g.z_noise = 0;
    g.alpha = 0.5;
    const auto a = generate_synthetic(g, kParams, 20, 5);
    const auto b = generate_synthetic(g, kParams, 20, 5);
    const auto c = generate_synthetic(g, kParams, 20, 6);
    for (std::size_t t = 0; t < 20; ++t) CHECK(a.frames[t].features == b.frames[t].features);
    // Same latent path (no latent noise) and same embedding, different seeds:
    // noise-free features coincide.
    for (std::size_t t = 0; t < 20; ++t) CHECK(a.frames[t].features == c.frames[t].features);
}

TEST_CASE("generator parameter validation") {
    GeneratorParams g;
    g.alpha = 1.0;
    CHECK_THROWS_AS(generate_synthetic(g, kParams, 10, 1), DomainError);
    g = GeneratorParams{};
    g.alpha = -0.1;
    CHECK_THROWS_AS(generate_synthetic(g, kParams, 10, 1), DomainError);
    g = GeneratorParams{};
    g.span = 0;
    CHECK_THROWS_AS(generate_synthetic(g, kParams, 10, 1), DomainError);
    CHECK_THROWS_AS(generate_synthetic(GeneratorParams{}, kParams, 0, 1), DomainError);
}

TEST_CASE("trace CSV round trip is lossless to 6 decimals") {
    const auto t = generate_synthetic(GeneratorParams{}, kParams, 3, 11);
    const auto path = tmp("offsim_trace_rt.csv");
    save_trace(path, t, kParams);
    const auto back = load_trace(path, kParams);
    REQUIRE(back.size() == 3);
    CHECK(back.k == t.k);
    CHECK(back.metadata == t.metadata);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < t.k; ++j)
            CHECK(std::abs(back.frames[i].features[j] - t.frames[i].features[j]) < 5e-7);
        CHECK(std::abs(back.frames[i].map_full - t.frames[i].map_full) < 5e-7);
        for (const auto& [key, v] : t.frames[i].map_partial)
            CHECK(std::abs(back.frames[i].map_partial.at(key) - v) < 5e-7);
    }
}

TEST_CASE("trace loader diagnostics") {
    const std::string header = "f0,f1,map_full,map_radar_lidar,map_radar\n";
    SUBCASE("valid with comments") {
        const auto t = parse_trace_csv("# note\n" + header + "0.1,0.2,0.9,0.8,0.7\n# mid comment\n0.3,0.4,0.5,0.5,0.4\n",
                                       kParams);
        CHECK(t.size() == 2);
        CHECK(t.k == 2);
        CHECK(t.frames[1].map_partial.at("radar") == doctest::Approx(0.4));
    }
    SUBCASE("range error names the row") {
        CHECK_THROWS_WITH_AS(parse_trace_csv(header + "0.1,0.2,0.9,0.8,0.7\n0.1,0.2,1.3,0.8,0.7\n", kParams, "t.csv"),
                             doctest::Contains("t.csv:3: map_full = 1.3 outside [0,1]"), TraceError);
    }
    SUBCASE("missing partial column lists the expected schema") {
        CHECK_THROWS_WITH_AS(parse_trace_csv("f0,f1,map_full,map_radar\n0.1,0.2,0.9,0.7\n", kParams),
                             doctest::Contains("f0,f1,map_full,map_radar_lidar,map_radar"), TraceError);
    }
    SUBCASE("inconsistent column count") {
        CHECK_THROWS_WITH_AS(parse_trace_csv(header + "0.1,0.2,0.9,0.8\n", kParams), doctest::Contains("columns"),
                             TraceError);
    }
    SUBCASE("non-numeric cell") {
        CHECK_THROWS_WITH_AS(parse_trace_csv(header + "0.1,abc,0.9,0.8,0.7\n", kParams), doctest::Contains("f1"),
                             TraceError);
    }
    SUBCASE("empty") {
        CHECK_THROWS_AS(parse_trace_csv(header, kParams), TraceError);
        CHECK_THROWS_AS(parse_trace_csv("", kParams), TraceError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_trace(tmp("offsim_no_such_trace.csv"), kParams), TraceError); }
}

TEST_CASE("realized_map") {
    FrameRecord f;
    f.features = {0.0};
    f.map_full = 0.9;
    f.map_partial = {{"radar_lidar", 0.8}, {"radar", 0.6}};
    CHECK(realized_map(f, kParams, Action{0}, false) == 0.9);
    CHECK(realized_map(f, kParams, Action{0}, true) == 0.9);
    CHECK(realized_map(f, kParams, Action{3}, true) == 0.9);
    CHECK(realized_map(f, kParams, Action{3}, false) == 0.6);
    CHECK(realized_map(f, kParams, Action{2}, false) == 0.8);
    CHECK_THROWS_AS(realized_map(f, kParams, Action{1}, false), DomainError);
}

TEST_CASE("map_full quantile") {
    ScenarioTrace t;
    t.k = 1;
    for (const double m : {0.5, 0.1, 0.9, 0.3, 0.7}) t.frames.push_back(FrameRecord{{0.0}, m, {}});
    CHECK(map_full_quantile(t, 0.0) == 0.1);
    CHECK(map_full_quantile(t, 0.5) == 0.5);
    CHECK(map_full_quantile(t, 1.0) == 0.9);
    CHECK(map_full_quantile(t, 0.7) == 0.5);
}
