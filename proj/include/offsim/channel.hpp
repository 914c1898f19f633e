#pragma once

#include <span>
#include <string>
#include <vector>

#include "offsim/random.hpp"

namespace offsim {

// i.i.d. Rayleigh channel capacity, Phi ~ Rayleigh(sigma), in Mbit/s.
struct ChannelModel {
    double sigma = 10.0;
    double floor_mbps = 0.1;

    void validate() const;
};

struct ChannelFit {
    ChannelModel model;
    std::size_t n = 0;
    double mean = 0;
    double min = 0;
    double max = 0;
};

// Maximum-likelihood scale: sigma = sqrt(sum x^2 / 2n).
ChannelModel fit_rayleigh(std::span<const double> samples_mbps);
ChannelFit fit_rayleigh_with_stats(std::span<const double> samples_mbps);

// Inverse-CDF draw for a given uniform u in (0,1), clamped at the floor.
double capacity_from_uniform(const ChannelModel& model, double u);
double sample_capacity(const ChannelModel& model, Rng& rng);

// One positive decimal per line; '#' starts a comment.
std::vector<double> load_throughput_trace(const std::string& path);

}  // namespace offsim
