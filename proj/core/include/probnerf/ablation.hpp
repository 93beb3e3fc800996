#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "probnerf/dataset.hpp"
#include "probnerf/hmc.hpp"

namespace probnerf {

// n log-spaced values from lo to hi inclusive.
std::vector<double> log_sweep(double lo, double hi, int n);

struct RendererAblationConfig {
  std::vector<double> step_sizes = log_sweep(1e-5, 1e-1, 9);
  int n_chains = 8;
  int n_leapfrog = 10;
  int iterations = 20;
  double observation_scale = 0.1;
  int quadrature_samples = 16;
  CameraRig rig{3.0, 60.0 * 3.14159265358979323846 / 180.0, 16, 16};
  double azimuth = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct AcceptanceRow {
  std::string renderer;  // "foam" or "quadrature"
  double step_size = 0.0;
  double acceptance = 0.0;  // mean acceptance probability across chains, last iteration
};

// For each renderer and step size: draw (z~, delta) from the prior, render one
// view with that renderer, start every chain at the drawn state and run
// fixed-temperature HMC. The quadrature target reseeds its jitter per proposal.
std::vector<AcceptanceRow> ablate_renderer(const ProbNerfModel& model, const RendererAblationConfig& config);
void write_acceptance_csv(const std::filesystem::path& path, const std::vector<AcceptanceRow>& rows);

struct AnnealingAblationConfig {
  HmcConfig hmc;             // annealed run; the fixed run reuses its seeds and length
  double fixed_step = 0.004;
};

struct AnnealingAblationReport {
  std::vector<double> annealed_mse;  // per chain, final state on the conditioned pixels
  std::vector<double> fixed_mse;
  double annealed_spread = 0.0;      // across-chain standard deviation
  double fixed_spread = 0.0;
};

AnnealingAblationReport ablate_annealing(const ProbNerfModel& model, const Observation& obs,
                                         const AnnealingAblationConfig& config);
void write_annealing_csv(const std::filesystem::path& path, const AnnealingAblationReport& report);

// Per-channel MSE of a state's foam render against the observed pixels.
double observation_mse(const ProbNerfModel& model, const Vector& state, bool latent_only, const Observation& obs);

double standard_deviation(const std::vector<double>& values);
double median(std::vector<double> values);

}  // namespace probnerf
