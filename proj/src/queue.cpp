#include "offsim/queue.hpp"

#include <algorithm>
#include <cmath>

#include "offsim/cost_model.hpp"

namespace offsim {

namespace {

void check(double rho, int cap) {
    if (!(rho > 0 && rho < 1)) throw DomainError("server load rho must lie in (0,1)");
    if (cap < 1) throw DomainError("queue size C must be >= 1");
}

// 1 - rho^(C+1), stable for rho near 1 and for large C.
double normalizer(double rho, int cap) { return -std::expm1((cap + 1.0) * std::log(rho)); }

}  // namespace

void QueueModel::validate() const {
    check(rho, cap);
    if (!(t_service_ms > 0)) throw DomainError("t_service_ms must be > 0");
}

std::vector<double> queue_pmf(double rho, int cap) {
    check(rho, cap);
    const double log_rho = std::log(rho);
    const double log_head = std::log1p(-rho) - std::log(normalizer(rho, cap));
    std::vector<double> pmf(static_cast<std::size_t>(cap) + 1);
    for (int c = 0; c <= cap; ++c) pmf[c] = std::exp(log_head + c * log_rho);
    return pmf;
}

double queue_mean_position(double rho, int cap) {
    // Untruncated mean minus the truncation correction.
    check(rho, cap);
    const double tail = std::exp((cap + 1.0) * std::log(rho));
    return rho / (1 - rho) - (cap + 1.0) * tail / normalizer(rho, cap);
}

int position_from_uniform(const QueueModel& model, double u) {
    // CDF(c) = (1 - rho^(c+1)) / (1 - rho^(C+1)); smallest c with CDF(c) >= u.
    const double z = normalizer(model.rho, model.cap);
    const double steps = std::log1p(-u * z) / std::log(model.rho);
    const double c = std::ceil(steps) - 1.0;
    return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(model.cap)));
}

int sample_position(const QueueModel& model, Rng& rng) { return position_from_uniform(model, rng.uniform()); }

double sample_delay(const QueueModel& model, Rng& rng) {
    return (sample_position(model, rng) + 1) * model.t_service_ms;
}

double mean_delay(const QueueModel& model) {
    return (queue_mean_position(model.rho, model.cap) + 1.0) * model.t_service_ms;
}

}  // namespace offsim
