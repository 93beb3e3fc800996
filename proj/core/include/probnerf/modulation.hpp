#pragma once

// Latent-shift modulation of an MLP and its concatenation form.
//
// Shift form: a'_i = W_i h_{i-1} + b_i + V_i z, h_i = relu(a'_i) for hidden
// layers, output a'_L. Concatenation form: a'_i = [W_i | V_i] [h_{i-1}; z] + b_i.
// The two agree exactly when the augmented matrices are the block
// composition of the shift parameterization.

#include <vector>

#include "probnerf/autodiff.hpp"

namespace probnerf {

struct Mlp {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Index input_dim() const { return weights.front().cols(); }
  Index output_dim() const { return weights.back().rows(); }
};

// Plain ReLU MLP with a linear output layer.
Vector mlp_forward(const Mlp& mlp, const Vector& input);

Vector modulated_forward_shift(const Vector& z, const Mlp& base, const std::vector<Matrix>& shifts,
                               const Vector& input);

// `augmented` weights have z's columns appended after the activation columns.
Vector modulated_forward_concat(const Vector& z, const Mlp& augmented, const Vector& input);

// Builds [W_i | V_i] for every layer.
Mlp augment_with_shifts(const Mlp& base, const std::vector<Matrix>& shifts);

}  // namespace probnerf
