#pragma once

#include <doctest.h>

#include <cmath>
#include <random>

#include "mecopt/model.hpp"

namespace testing {

inline mecopt::UserTask task(double R, double c, double f_local, double deadline = 2e-3,
                             double p_max = 0.60256, double kappa = 1e-24) {
    return {R, c, deadline, f_local, p_max, kappa};
}

inline mecopt::ChannelState channel(std::size_t K, std::size_t N, double gain = 1.0, double noise = 1.0,
                                    double bandwidth = 12.5e3) {
    return {mecopt::Matrix(K, N, gain), noise, bandwidth};
}

inline mecopt::SystemConfig config(std::size_t K, std::size_t N, double F = 1e10, double T = 2e-3,
                                   double kappa_edge = 1e-26) {
    return {F, kappa_edge, T, N, K};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

/// Draws a task uniformly from the default parameter ranges.
inline mecopt::UserTask random_task(std::mt19937_64& rng, double deadline = 2e-3) {
    std::uniform_real_distribution<double> R(1000, 1500), c(1000, 1200), f(0.6e9, 0.7e9);
    return task(R(rng), c(rng), f(rng), deadline);
}

}  // namespace testing
