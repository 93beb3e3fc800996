#include "probnerf/field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "probnerf/ops.hpp"

namespace probnerf {

void FieldConfig::validate() const {
  if (encoding_order < 1) throw ShapeError("FieldConfig: encoding_order must be >= 1");
  if (hidden_width < 1) throw ShapeError("FieldConfig: hidden_width must be >= 1");
  if (hidden_layers_per_mlp < 1) throw ShapeError("FieldConfig: hidden_layers_per_mlp must be >= 1");
  if (grid_size < 1) throw ShapeError("FieldConfig: grid_size must be >= 1");
}

namespace {

std::vector<LayerSlice> mlp_layout(Index in, Index hidden, int hidden_layers, Index out,
                                   Index offset) {
  std::vector<LayerSlice> layers;
  Index width = in;
  for (int l = 0; l < hidden_layers; ++l) {
    layers.push_back({offset, width, hidden});
    offset += layers.back().size();
    width = hidden;
  }
  layers.push_back({offset, width, out});
  return layers;
}

Index layout_end(const std::vector<LayerSlice>& layers) {
  return layers.back().offset + layers.back().size();
}

}  // namespace

std::vector<LayerSlice> density_layout(const FieldConfig& config) {
  return mlp_layout(config.density_input_dim(), config.hidden_width, config.hidden_layers_per_mlp,
                    1, 0);
}

std::vector<LayerSlice> color_layout(const FieldConfig& config) {
  return mlp_layout(config.color_input_dim(), config.hidden_width, config.hidden_layers_per_mlp, 3,
                    layout_end(density_layout(config)));
}

Index FieldConfig::weight_count() const {
  validate();
  return layout_end(color_layout(*this));
}

FieldWeights::FieldWeights(FieldConfig config, Vector flat)
    : config_(config), flat_(std::move(flat)) {
  config_.validate();
  if (flat_.size() != config_.weight_count()) {
    throw ShapeError("FieldWeights: expected " + std::to_string(config_.weight_count()) +
                     " weights, got " + std::to_string(flat_.size()));
  }
}

FieldWeights FieldWeights::zeros(const FieldConfig& config) {
  return FieldWeights(config, Vector::Zero(config.weight_count()));
}

FieldWeights FieldWeights::random(const FieldConfig& config, Rng& rng) {
  Vector flat = Vector::Zero(config.weight_count());
  auto fill = [&](const std::vector<LayerSlice>& layers) {
    for (const LayerSlice& l : layers) {
      const double bound = std::sqrt(6.0 / static_cast<double>(l.in));
      for (Index k = 0; k < l.out * l.in; ++k) flat[l.offset + k] = rng.uniform(-bound, bound);
    }
  };
  fill(density_layout(config));
  fill(color_layout(config));
  return FieldWeights(config, std::move(flat));
}

namespace {

std::vector<DenseLayer> unpack(const Vector& flat, const std::vector<LayerSlice>& layers) {
  std::vector<DenseLayer> out;
  for (const LayerSlice& l : layers) {
    DenseLayer d;
    d.weight.resize(l.out, l.in);
    for (Index r = 0; r < l.out; ++r) {
      for (Index c = 0; c < l.in; ++c) d.weight(r, c) = flat[l.offset + r * l.in + c];
    }
    d.bias = flat.segment(l.offset + l.out * l.in, l.out);
    out.push_back(std::move(d));
  }
  return out;
}

void pack(const std::vector<DenseLayer>& dense, const std::vector<LayerSlice>& layers,
          Vector& flat) {
  if (dense.size() != layers.size()) throw ShapeError("flatten_weights: wrong number of layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSlice& l = layers[i];
    const DenseLayer& d = dense[i];
    if (d.weight.rows() != l.out || d.weight.cols() != l.in || d.bias.size() != l.out) {
      throw ShapeError("flatten_weights: layer " + std::to_string(i) + " has shape " +
                       std::to_string(d.weight.rows()) + "x" + std::to_string(d.weight.cols()) +
                       ", expected " + std::to_string(l.out) + "x" + std::to_string(l.in));
    }
    for (Index r = 0; r < l.out; ++r) {
      for (Index c = 0; c < l.in; ++c) flat[l.offset + r * l.in + c] = d.weight(r, c);
    }
    flat.segment(l.offset + l.out * l.in, l.out) = d.bias;
  }
}

}  // namespace

FieldLayers unflatten_weights(const FieldWeights& weights) {
  return {unpack(weights.flat(), density_layout(weights.config())),
          unpack(weights.flat(), color_layout(weights.config()))};
}

FieldWeights flatten_weights(const FieldLayers& layers, const FieldConfig& config) {
  Vector flat = Vector::Zero(config.weight_count());
  pack(layers.density, density_layout(config), flat);
  pack(layers.color, color_layout(config), flat);
  return FieldWeights(config, std::move(flat));
}

Vector positional_encode(std::span<const double> x, int order) {
  Matrix column(static_cast<Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) column(static_cast<Index>(i), 0) = x[i];
  return encode_columns(column, order).col(0);
}

Matrix encode_columns(const Matrix& x, int order) {
  if (order < 1) throw ShapeError("positional encoding order must be >= 1");
  const Index block = 2 * order + 1;
  Matrix out(x.rows() * block, x.cols());
  for (Index p = 0; p < x.cols(); ++p) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double xi = x(i, p);
      const Index base = i * block;
      out(base, p) = xi;
      double freq = std::numbers::pi;
      for (int j = 0; j < order; ++j) {
        const double phase = freq * xi;
        out(base + 1 + 2 * j, p) = std::sin(phase);
        out(base + 2 + 2 * j, p) = std::sin(phase + 0.5);
        freq *= 2.0;
      }
    }
  }
  return out;
}

FieldVars field_forward(const ad::Var& weights, const FieldConfig& config,
                        const ad::Var& position_features, const ad::Var& direction_features) {
  if (position_features.rows() != config.density_input_dim() ||
      direction_features.rows() != config.density_input_dim()) {
    throw ShapeError("field_forward: feature rows do not match the field config");
  }
  const auto density = density_layout(config);
  ad::Var h = position_features;
  for (std::size_t l = 0; l + 1 < density.size(); ++l) {
    h = ad::relu(ad::affine(weights, density[l].offset, density[l].out, density[l].in, h));
  }
  const LayerSlice& dl = density.back();
  ad::Var sigma = ad::softplus(ad::affine(weights, dl.offset, dl.out, dl.in, h));

  const auto color = color_layout(config);
  h = ad::relu(ad::affine(weights, color[0].offset, color[0].out,
                          {position_features, direction_features, sigma}));
  for (std::size_t l = 1; l + 1 < color.size(); ++l) {
    h = ad::relu(ad::affine(weights, color[l].offset, color[l].out, color[l].in, h));
  }
  const LayerSlice& cl = color.back();
  ad::Var rgb = ad::sigmoid(ad::affine(weights, cl.offset, cl.out, cl.in, h));
  return {sigma, rgb};
}

FieldOutput eval_field(const FieldWeights& weights, const Eigen::Vector3d& x,
                       const Eigen::Vector3d& v) {
  const int order = weights.config().encoding_order;
  ad::Tape tape;
  ad::Var w = tape.constant(weights.flat());  // throws NonFiniteError on bad weights
  ad::Var px = tape.constant(encode_columns(Matrix(x), order));
  ad::Var pv = tape.constant(encode_columns(Matrix(v), order));
  FieldVars out = field_forward(w, weights.config(), px, pv);
  FieldOutput result;
  result.sigma = out.sigma.value()(0, 0);
  result.color = out.color.value().col(0);
  return result;
}

double squash_density(double sigma, int grid_size) {
  return -std::expm1(-sigma / static_cast<double>(grid_size));
}

}  // namespace probnerf
