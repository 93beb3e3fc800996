#pragma once

// Per-object radiance field: sinusoidal encoding, a density MLP over the
// encoded position and a color MLP over [encoded position, encoded
// direction, density]. All weights live in one flat vector.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "probnerf/autodiff.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

struct FieldConfig {
  int encoding_order = 10;
  int hidden_width = 64;
  int hidden_layers_per_mlp = 2;
  int grid_size = 128;

  static FieldConfig paper() { return {}; }
  static FieldConfig desk() { return {4, 32, 2, 16}; }

  void validate() const;

  // Encoded width of a d-dimensional input.
  Index encoded_dim(Index d) const { return d * (2 * encoding_order + 1); }
  Index density_input_dim() const { return encoded_dim(3); }
  Index color_input_dim() const { return 2 * encoded_dim(3) + 1; }
  Index weight_count() const;

  bool operator==(const FieldConfig&) const = default;
};

// Location of one dense layer inside the flat weight vector: a row-major
// (out x in) matrix at `offset` followed by `out` biases.
struct LayerSlice {
  Index offset = 0;
  Index in = 0;
  Index out = 0;

  Index size() const { return out * in + out; }
};

std::vector<LayerSlice> density_layout(const FieldConfig& config);
std::vector<LayerSlice> color_layout(const FieldConfig& config);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

struct FieldLayers {
  std::vector<DenseLayer> density;
  std::vector<DenseLayer> color;
};

class FieldWeights {
 public:
  FieldWeights(FieldConfig config, Vector flat);

  static FieldWeights zeros(const FieldConfig& config);
  // Uniform fan-in initialization, one draw per weight.
  static FieldWeights random(const FieldConfig& config, Rng& rng);

  const FieldConfig& config() const { return config_; }
  const Vector& flat() const { return flat_; }

 private:
  FieldConfig config_;
  Vector flat_;
};

FieldLayers unflatten_weights(const FieldWeights& weights);
FieldWeights flatten_weights(const FieldLayers& layers, const FieldConfig& config);

// Per scalar x_i: [x_i, sin(2^0 pi x_i), sin(2^0 pi x_i + 0.5), ...,
// sin(2^(L-1) pi x_i), sin(2^(L-1) pi x_i + 0.5)], blocks concatenated in
// input order.
Vector positional_encode(std::span<const double> x, int order);
// Column-wise encoding of a (d x P) matrix into (d * (2L+1)) x P.
Matrix encode_columns(const Matrix& x, int order);

struct FieldOutput {
  double sigma = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

// Density and color for a batch of points on a tape.
struct FieldVars {
  ad::Var sigma;  // 1 x P
  ad::Var color;  // 3 x P
};

// `position_features` is encode_columns(x) and `direction_features` is
// encode_columns(v) for the same P samples.
FieldVars field_forward(const ad::Var& weights, const FieldConfig& config,
                        const ad::Var& position_features, const ad::Var& direction_features);

FieldOutput eval_field(const FieldWeights& weights, const Eigen::Vector3d& x,
                       const Eigen::Vector3d& v);

// 1 - exp(-sigma / G).
double squash_density(double sigma, int grid_size);

}  // namespace probnerf
