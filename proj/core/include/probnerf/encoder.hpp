#pragma once

// Per-view amortized encoder: a strided CNN over the image and a small MLP
// over the flattened camera-to-world matrix, jointly mapped to the location
// and log-scale of a diagonal Gaussian potential.

#include <array>
#include <span>
#include <vector>

#include "probnerf/autodiff.hpp"
#include "probnerf/camera.hpp"
#include "probnerf/image.hpp"
#include "probnerf/ops.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

struct EncoderConfig {
  int image_size = 32;
  std::array<int, 5> channels{16, 32, 64, 64, 64};
  int kernel = 3;
  int stride = 2;
  int camera_hidden = 64;

  bool operator==(const EncoderConfig&) const = default;
};

struct GaussianPotential {
  Vector mu;
  Vector tau;  // precisions, > 0
};

// Tape counterpart of GaussianPotential.
struct PotentialVars {
  ad::Var mu;
  ad::Var tau;
};

class Encoder {
 public:
  Encoder(EncoderConfig config, Index latent_dim);

  const EncoderConfig& config() const { return config_; }
  Index latent_dim() const { return latent_dim_; }
  Index parameter_count() const { return parameter_count_; }
  Vector initialize(Rng& rng) const;

  // Returns the 2K x 1 column [mu; log_scale].
  ad::Var forward(const ad::Var& params, const ad::Var& image, const Eigen::Matrix4d& camera) const;

  // mu and tau = exp(-2 log_scale).
  PotentialVars encode(const ad::Var& params, const Image& image, const Camera& camera) const;

 private:
  EncoderConfig config_;
  Index latent_dim_;
  std::vector<ad::Conv2dShape> convs_;
  std::vector<Index> conv_offsets_;
  Index camera_offset_ = 0;
  Index head_offset_ = 0;
  Index parameter_count_ = 0;
};

GaussianPotential encode_view(const Encoder& encoder, const Vector& params, const Image& image,
                              const Camera& camera);

// Precision-weighted pooling: tau = sum_j tau_j, mu = sum_j tau_j mu_j / tau,
// with the prior potential as the j = 0 term.
GaussianPotential pool_potentials(const GaussianPotential& prior,
                                  std::span<const GaussianPotential> views);
PotentialVars pool_potentials(const PotentialVars& prior, std::span<const PotentialVars> views);

// Prior potential stored as [mu_0; log_scale_0].
PotentialVars prior_potential(const ad::Var& packed, Index latent_dim);

}  // namespace probnerf
