#include "offsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "offsim/config.hpp"
#include "offsim/cost_model.hpp"

namespace offsim {

void ChannelModel::validate() const {
    if (!(sigma > 0) || !std::isfinite(sigma)) throw DomainError("channel sigma must be > 0");
    if (!(floor_mbps >= 0)) throw DomainError("channel floor must be >= 0");
}

ChannelFit fit_rayleigh_with_stats(std::span<const double> samples) {
    if (samples.size() < 2) throw DomainError("Rayleigh fit needs at least 2 samples");
    ChannelFit fit;
    double sum = 0, sum_sq = 0;
    fit.min = samples.front();
    fit.max = samples.front();
    for (const double x : samples) {
        if (!(x > 0) || !std::isfinite(x)) throw DomainError("throughput samples must be positive and finite");
        sum += x;
        sum_sq += x * x;
        fit.min = std::min(fit.min, x);
        fit.max = std::max(fit.max, x);
    }
    fit.n = samples.size();
    fit.mean = sum / static_cast<double>(fit.n);
    fit.model.sigma = std::sqrt(sum_sq / (2.0 * static_cast<double>(fit.n)));
    return fit;
}

ChannelModel fit_rayleigh(std::span<const double> samples) { return fit_rayleigh_with_stats(samples).model; }

double capacity_from_uniform(const ChannelModel& model, double u) {
    return std::max(model.floor_mbps, model.sigma * std::sqrt(-2.0 * std::log(u)));
}

double sample_capacity(const ChannelModel& model, Rng& rng) { return capacity_from_uniform(model, rng.uniform()); }

std::vector<double> load_throughput_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open throughput trace: " + path);
    std::vector<double> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != line.size() || !(v > 0) || !std::isfinite(v))
            throw DomainError(path + ":" + std::to_string(line_no) + ": expected a positive rate, got '" + line + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace offsim
