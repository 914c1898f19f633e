#pragma once

#include <vector>

#include "offsim/random.hpp"

namespace offsim {

// Truncated-geometric queue position at the edge server:
//   q_c = (1 - rho) rho^c / (1 - rho^(C+1)),  c = 0..C
struct QueueModel {
    double rho = 0.9;
    int cap = 4000;
    double t_service_ms = 1.5;

    void validate() const;
};

std::vector<double> queue_pmf(double rho, int cap);
double queue_mean_position(double rho, int cap);

// Inverse CDF of the truncated geometric, without materializing the pmf.
int position_from_uniform(const QueueModel& model, double u);
int sample_position(const QueueModel& model, Rng& rng);

// The task waits behind c others and is then served: (c + 1) * t_service.
double sample_delay(const QueueModel& model, Rng& rng);
double mean_delay(const QueueModel& model);

}  // namespace offsim
