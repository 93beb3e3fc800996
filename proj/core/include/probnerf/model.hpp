#pragma once

// The generative model over radiance fields:
//   z~ ~ N(0, I), z = flow(z~), w = hypernet(z), delta ~ N(0, I),
//   w~ = w + sqrt(alpha) delta, y_n ~ N(render(w~, r_n), s^2) per channel.

#include <cstdint>
#include <span>
#include <utility>

#include "probnerf/encoder.hpp"
#include "probnerf/field.hpp"
#include "probnerf/flow.hpp"
#include "probnerf/hypernet.hpp"
#include "probnerf/observation.hpp"
#include "probnerf/render.hpp"

namespace probnerf {

struct ModelConfig {
  FieldConfig field = FieldConfig::desk();
  FoamScene scene;
  Index latent_dim = 16;
  Index flow_hidden = 64;
  Index hypernet_hidden = 256;
  EncoderConfig encoder;
  double weight_variance = 0.025 * 0.025;
  double observation_scale = 0.1;
  std::uint64_t permutation_seed = 1;

  static ModelConfig paper();
  static ModelConfig desk() { return {}; }
  void validate() const;
};

struct ModelParams {
  Vector flow;             // zeta
  Vector hypernet;         // theta
  Vector encoder;          // phi
  Vector prior_potential;  // [mu_0; log_scale_0]
};

struct LatentState {
  Vector z_tilde;
  Vector delta;  // empty for latent-only states (delta fixed at 0)

  Vector flat() const;
  static LatentState from_flat(const Vector& flat, Index latent_dim);
};

struct NoiseModel {
  double weight_variance = 0.025 * 0.025;
  double observation_scale = 0.1;
};

class ProbNerfModel {
 public:
  ProbNerfModel(ModelConfig config, ModelParams params);

  static ProbNerfModel initialize(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ModelParams& params() const { return params_; }
  void set_params(ModelParams params);
  const RealNvpFlow& flow() const { return flow_; }
  const Hypernet& hypernet() const { return hypernet_; }
  const Encoder& encoder() const { return encoder_; }
  const FoamScene& scene() const { return config_.scene; }

  Index latent_dim() const { return config_.latent_dim; }
  Index weight_dim() const { return hypernet_.output_dim(); }
  Index state_dim() const { return latent_dim() + weight_dim(); }

  // Flow then hypernet, no perturbation.
  FieldWeights decode_code(const Vector& z_tilde) const;
  // Perturbed weights w~ for a (possibly latent-only) state.
  FieldWeights decode(const LatentState& state) const;

  // Tape version: `state` is [z~; delta] (or just z~ when latent_only).
  ad::Var decode(const ad::Var& state, bool latent_only) const;

 private:
  void check_params() const;

  ModelConfig config_;
  ModelParams params_;
  Matrix flow_values_;
  Matrix hypernet_values_;
  RealNvpFlow flow_;
  Hypernet hypernet_;
  Encoder encoder_;
};

Vector perturb_weights(const Vector& w, const Vector& delta, double weight_variance);
FieldWeights perturb_weights(const FieldWeights& w, const Vector& delta, double weight_variance);

// Standard normal log-density of the concatenated state, constants included.
double log_prior(const LatentState& state);
ad::Var standard_normal_log_density(const ad::Var& x);

// Sum of squared residuals between rendered and observed pixels (1x1).
ad::Var squared_error(const ad::Var& weights, const FieldConfig& config, const SampleBatch& batch,
                      const Matrix& pixels);

// Per-channel Gaussian log-likelihood from a squared error over n scalars.
double gaussian_log_likelihood(double sse, Index n_scalars, double s);
ad::Var gaussian_log_likelihood(const ad::Var& sse, Index n_scalars, double s);

double log_likelihood(const FieldWeights& w_tilde, std::span<const Ray> rays,
                      const Eigen::Matrix3Xd& pixels, double s, const FoamScene& scene);

// log_prior(state) + log_likelihood(decode(state)); no flow Jacobian term.
ad::Var log_joint_noncentered(const ProbNerfModel& model, const ad::Var& state,
                              const PreparedObservation& obs, double s, bool latent_only = false);
double log_joint_noncentered(const ProbNerfModel& model, const LatentState& state,
                             const Observation& obs, double s);

// Ancestral draw of (z~, delta) and the perturbed weights.
std::pair<LatentState, FieldWeights> sample_prior(const ProbNerfModel& model, std::uint64_t seed);

}  // namespace probnerf
