#pragma once

#include "probnerf/autodiff.hpp"
#include "probnerf/field.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

struct HypernetConfig {
  Index latent_dim = 16;
  Index hidden_width = 512;
};

// Maps a latent code to a full set of field weights: two ReLU hidden layers
// followed by a linear projection onto the flat weight vector.
class Hypernet {
 public:
  Hypernet(HypernetConfig config, FieldConfig field);

  const HypernetConfig& config() const { return config_; }
  const FieldConfig& field_config() const { return field_; }
  Index output_dim() const { return output_dim_; }
  Index parameter_count() const;

  // The projection bias starts at a random field initialization and the
  // projection matrix at `projection_scale` times a fan-in uniform draw, so
  // every code initially decodes to a usable field.
  Vector initialize(Rng& rng, double projection_scale = 0.1) const;

  ad::Var forward(const ad::Var& params, const ad::Var& z) const;
  FieldWeights forward(const Vector& params, const Vector& z) const;

 private:
  HypernetConfig config_;
  FieldConfig field_;
  Index output_dim_;
};

}  // namespace probnerf
