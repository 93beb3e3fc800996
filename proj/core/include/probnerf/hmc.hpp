#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "probnerf/model.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

struct AnnealingSchedule {
  double s0 = 5.0;
  double sT = 0.1;
  int steps = 100;
  double base_step = 0.005;

  void validate() const;
};

// s_t = s0^((T - t) / T) * sT^(t / T) for 0 <= t <= T.
double schedule_noise(const AnnealingSchedule& schedule, int t);
// base_step * s_t / s0.
double schedule_step_size(const AnnealingSchedule& schedule, int t);

using GradientFn = std::function<Vector(const Vector&)>;

struct LeapfrogResult {
  Vector position;
  Vector momentum;
  bool divergent = false;
};

// Half kick, drift, half kick, repeated n_steps times with unit mass. A
// non-finite gradient or position stops integration and flags divergence.
// `initial_gradient`, when given, is the gradient at `position`.
LeapfrogResult leapfrog(const Vector& position, const Vector& momentum, double step, int n_steps,
                        const GradientFn& grad_log_density, const Vector* initial_gradient = nullptr);

// A log-density of the form log_prior(x) + N(y; render(x), s^2) whose
// tempering only rescales the squared-error term.
struct TargetEvaluation {
  double log_prior = 0.0;
  Vector prior_gradient;
  double sse = 0.0;
  Vector sse_gradient;  // empty when the target has no data term
  Index n_scalars = 0;

  double log_density(double s) const;
  Vector gradient(double s) const;
  bool finite() const;
};

class TemperedTarget {
 public:
  virtual ~TemperedTarget() = default;
  virtual Index dim() const = 0;
  // `seed` selects the renderer randomness of stochastic targets.
  virtual TargetEvaluation evaluate(const Vector& x, std::uint64_t seed) const = 0;
  virtual bool stochastic() const { return false; }
};

// Log-density supplied as value-and-gradient callbacks; s has no effect.
class FunctionTarget : public TemperedTarget {
 public:
  using Fn = std::function<double(const Vector&, Vector& gradient)>;
  FunctionTarget(Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  Index dim() const override { return dim_; }
  TargetEvaluation evaluate(const Vector& x, std::uint64_t seed) const override;

 private:
  Index dim_;
  Fn fn_;
};

// Noncentered model posterior over [z~; delta] (or z~ alone when latent_only)
// with the foam renderer.
class FoamTarget : public TemperedTarget {
 public:
  FoamTarget(const ProbNerfModel& model, const Observation& obs, bool latent_only = false);
  Index dim() const override;
  TargetEvaluation evaluate(const Vector& x, std::uint64_t seed) const override;
  const ProbNerfModel& model() const { return model_; }

 private:
  const ProbNerfModel& model_;
  PreparedObservation obs_;
  bool latent_only_;
};

// Same posterior rendered by stratified quadrature; every evaluation uses the
// sample jitter drawn from its seed.
class QuadratureTarget : public TemperedTarget {
 public:
  QuadratureTarget(const ProbNerfModel& model, const Observation& obs, int n_samples,
                   bool latent_only = false);
  Index dim() const override;
  TargetEvaluation evaluate(const Vector& x, std::uint64_t seed) const override;
  bool stochastic() const override { return true; }

 private:
  const ProbNerfModel& model_;
  Observation obs_;
  int n_samples_;
  bool latent_only_;
};

struct ChainState {
  Vector position;
  TargetEvaluation current;
  int t = 0;
  double step_size = 0.0;
  long proposals = 0;
  long accepted = 0;
  long divergences = 0;
  long gradient_evaluations = 0;
  Rng rng{0};

  double acceptance_rate() const { return proposals ? static_cast<double>(accepted) / proposals : 0.0; }
};

ChainState init_chain(const TemperedTarget& target, Vector position, std::uint64_t seed);

struct StepInfo {
  double accept_prob = 0.0;
  bool accepted = false;
  bool divergent = false;
};

// One Metropolis-corrected trajectory at temperature s. Stochastic targets
// draw one renderer seed per proposal; the current state's density is the one
// cached when it was accepted.
StepInfo hmc_step(ChainState& chain, const TemperedTarget& target, double s, double step, int n_leapfrog);

struct HmcConfig {
  AnnealingSchedule schedule;
  int n_chains = 8;
  int n_leapfrog = 100;
  int keep_last = 16;
  std::uint64_t seed = 0;
  bool anneal = true;         // false: every iteration at sT with fixed_step
  double fixed_step = 0.0005;
  unsigned threads = 0;
};

struct DiagnosticRow {
  int t = 0;
  double s = 0.0;
  double step_size = 0.0;
  double accept_prob = 0.0;
  double log_joint = 0.0;
};

struct ChainResult {
  std::uint64_t seed = 0;
  std::vector<Vector> samples;     // final keep_last iterates, oldest first
  std::vector<int> sample_steps;   // iteration index of each sample
  std::vector<DiagnosticRow> diagnostics;
  long accepted = 0;
  long proposals = 0;
  long divergences = 0;
  long gradient_evaluations = 0;   // leapfrog gradient evaluations
  double final_log_joint = 0.0;
};

struct ChainSet {
  HmcConfig config;
  std::vector<ChainResult> chains;

  std::vector<Vector> all_samples() const;
  std::size_t sample_count() const;
};

class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs independent chains for schedule.steps iterations (t = 1..T targets s_t
// with step schedule_step_size(t)). Chains start from standard-normal draws
// unless `initial` supplies one position per chain.
ChainSet run_chains(const TemperedTarget& target, const HmcConfig& config,
                    const std::vector<Vector>& initial = {});

ChainSet run_annealed_chains(const ProbNerfModel& model, const Observation& obs, const HmcConfig& config);
ChainSet run_latent_only_chains(const ProbNerfModel& model, const Observation& obs, const HmcConfig& config);

// Expands a sampled state into perturbed field weights.
FieldWeights state_weights(const ProbNerfModel& model, const Vector& state, bool latent_only);

}  // namespace probnerf
