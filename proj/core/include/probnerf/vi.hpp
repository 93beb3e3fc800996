#pragma once

#include <cstdint>
#include <vector>

#include "probnerf/hmc.hpp"
#include "probnerf/train.hpp"

namespace probnerf {

struct VIParams {
  Vector mu;
  Vector log_sigma;
};

struct ViConfig {
  int steps = 1500;
  double learning_rate = 1e-2;
  double observation_scale = 0.1;
  double initial_log_sigma = 0.0;
  bool sticking_the_landing = true;
  std::uint64_t seed = 0;
};

struct ViTrace {
  std::vector<double> elbo;  // single-sample estimate per step
};

// Mean-field Gaussian over the target's state, fitted by single-sample
// reparameterized gradients and Adam, starting from mu = 0.
VIParams fit_vi(const TemperedTarget& target, const ViConfig& config, ViTrace* trace = nullptr);
VIParams fit_vi(const TemperedTarget& target, const ViConfig& config, VIParams initial, ViTrace* trace = nullptr);

std::vector<Vector> sample_vi(const VIParams& params, int n, std::uint64_t seed);

// Single-sample ELBO gradient with respect to [mu; log_sigma].
Vector vi_gradient(const TemperedTarget& target, const VIParams& params, double s, bool sticking_the_landing,
                   Rng& rng);

// Mean over coordinates of the per-coordinate variance of vi_gradient.
double vi_gradient_variance(const TemperedTarget& target, const VIParams& params, double s,
                            bool sticking_the_landing, int draws, std::uint64_t seed);

}  // namespace probnerf
