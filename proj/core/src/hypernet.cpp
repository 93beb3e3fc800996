#include "probnerf/hypernet.hpp"

#include <cmath>
#include <string>

#include "probnerf/ops.hpp"

namespace probnerf {

Hypernet::Hypernet(HypernetConfig config, FieldConfig field)
    : config_(config), field_(field), output_dim_(field.weight_count()) {
  if (config_.latent_dim < 1 || config_.hidden_width < 1) {
    throw ShapeError("Hypernet: latent_dim and hidden_width must be positive");
  }
}

Index Hypernet::parameter_count() const {
  const Index k = config_.latent_dim, h = config_.hidden_width;
  return (h * k + h) + (h * h + h) + (output_dim_ * h + output_dim_);
}

Vector Hypernet::initialize(Rng& rng, double projection_scale) const {
  const Index k = config_.latent_dim, h = config_.hidden_width;
  Vector params = Vector::Zero(parameter_count());
  Index at = 0;
  auto fill = [&](Index out, Index in, double scale) {
    const double bound = scale * std::sqrt(6.0 / static_cast<double>(in));
    for (Index i = 0; i < out * in; ++i) params[at + i] = rng.uniform(-bound, bound);
    at += out * in + out;
  };
  fill(h, k, 1.0);
  fill(h, h, 1.0);
  const Index projection_bias = at + output_dim_ * h;
  fill(output_dim_, h, projection_scale);
  params.segment(projection_bias, output_dim_) = FieldWeights::random(field_, rng).flat();
  return params;
}

ad::Var Hypernet::forward(const ad::Var& params, const ad::Var& z) const {
  const Index k = config_.latent_dim, h = config_.hidden_width;
  if (params.rows() != parameter_count()) {
    throw ShapeError("Hypernet: expected " + std::to_string(parameter_count()) +
                     " parameters, got " + std::to_string(params.rows()));
  }
  if (z.rows() != k || z.cols() != 1) throw ShapeError("Hypernet: code has the wrong shape");
  ad::Var a = ad::relu(ad::affine(params, 0, h, k, z));
  ad::Var b = ad::relu(ad::affine(params, h * k + h, h, h, a));
  return ad::affine(params, h * k + h + h * h + h, output_dim_, h, b);
}

FieldWeights Hypernet::forward(const Vector& params, const Vector& z) const {
  ad::Tape tape;
  ad::Var w = forward(tape.constant(params), tape.constant(z));
  return FieldWeights(field_, w.value().col(0));
}

}  // namespace probnerf
