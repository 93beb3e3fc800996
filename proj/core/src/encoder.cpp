#include "probnerf/encoder.hpp"

#include <cmath>
#include <string>

namespace probnerf {

Encoder::Encoder(EncoderConfig config, Index latent_dim)
    : config_(config), latent_dim_(latent_dim) {
  if (latent_dim < 1) throw ShapeError("Encoder: latent_dim must be positive");
  if (config_.image_size < 1) throw ShapeError("Encoder: image_size must be positive");
  Index channels = 3, size = config_.image_size, at = 0;
  for (int c : config_.channels) {
    ad::Conv2dShape s;
    s.in_channels = channels;
    s.out_channels = c;
    s.height = size;
    s.width = size;
    s.kernel = config_.kernel;
    s.stride = config_.stride;
    s.padding = config_.kernel / 2;
    convs_.push_back(s);
    conv_offsets_.push_back(at);
    at += s.weight_count();
    channels = c;
    size = s.out_height();
  }
  camera_offset_ = at;
  const Index ch = config_.camera_hidden;
  at += (ch * 16 + ch) + (ch * ch + ch);
  head_offset_ = at;
  const Index features = channels + ch;
  at += 2 * latent_dim_ * features + 2 * latent_dim_;
  parameter_count_ = at;
}

Vector Encoder::initialize(Rng& rng) const {
  Vector params = Vector::Zero(parameter_count_);
  auto fill = [&](Index offset, Index out, Index in, double scale) {
    const double bound = scale * std::sqrt(6.0 / static_cast<double>(in));
    for (Index i = 0; i < out * in; ++i) params[offset + i] = rng.uniform(-bound, bound);
  };
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    const auto& s = convs_[l];
    fill(conv_offsets_[l], s.out_channels, s.in_channels * s.kernel * s.kernel, 1.0);
  }
  const Index ch = config_.camera_hidden;
  fill(camera_offset_, ch, 16, 1.0);
  fill(camera_offset_ + ch * 16 + ch, ch, ch, 1.0);
  fill(head_offset_, 2 * latent_dim_, convs_.back().out_channels + ch, 0.01);
  return params;
}

ad::Var Encoder::forward(const ad::Var& params, const ad::Var& image,
                         const Eigen::Matrix4d& camera) const {
  if (params.rows() != parameter_count_) {
    throw ShapeError("Encoder: expected " + std::to_string(parameter_count_) +
                     " parameters, got " + std::to_string(params.rows()));
  }
  ad::Var h = image;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    h = ad::relu(ad::conv2d(params, conv_offsets_[l], convs_[l], h));
  }
  ad::Var pooled = ad::mean_cols(h);

  Matrix cam(16, 1);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) cam(r * 4 + c, 0) = camera(r, c);
  }
  const Index ch = config_.camera_hidden;
  ad::Var c = image.tape().constant(std::move(cam));
  c = ad::relu(ad::affine(params, camera_offset_, ch, 16, c));
  c = ad::relu(ad::affine(params, camera_offset_ + ch * 16 + ch, ch, ch, c));
  return ad::affine(params, head_offset_, 2 * latent_dim_, {pooled, c});
}

PotentialVars Encoder::encode(const ad::Var& params, const Image& image,
                              const Camera& camera) const {
  if (image.width != config_.image_size || image.height != config_.image_size) {
    throw ShapeError("Encoder: image is " + std::to_string(image.width) + "x" +
                     std::to_string(image.height) + ", expected " +
                     std::to_string(config_.image_size) + " square");
  }
  Matrix centered = image.pixels.array() - 0.5;
  ad::Var x = params.tape().constant(std::move(centered));
  ad::Var out = forward(params, x, camera.camera_to_world());
  PotentialVars p;
  p.mu = ad::slice_rows(out, 0, latent_dim_);
  p.tau = ad::exp(-2.0 * ad::slice_rows(out, latent_dim_, latent_dim_));
  return p;
}

GaussianPotential encode_view(const Encoder& encoder, const Vector& params, const Image& image,
                              const Camera& camera) {
  ad::Tape tape;
  PotentialVars p = encoder.encode(tape.constant(params), image, camera);
  return {p.mu.value().col(0), p.tau.value().col(0)};
}

GaussianPotential pool_potentials(const GaussianPotential& prior,
                                  std::span<const GaussianPotential> views) {
  Vector tau = prior.tau;
  Vector weighted = prior.tau.cwiseProduct(prior.mu);
  for (const GaussianPotential& v : views) {
    if (v.mu.size() != prior.mu.size() || v.tau.size() != prior.tau.size()) {
      throw ShapeError("pool_potentials: dimension mismatch");
    }
    tau += v.tau;
    weighted += v.tau.cwiseProduct(v.mu);
  }
  return {weighted.cwiseQuotient(tau), tau};
}

PotentialVars pool_potentials(const PotentialVars& prior, std::span<const PotentialVars> views) {
  ad::Var tau = prior.tau;
  ad::Var weighted = prior.tau * prior.mu;
  for (const PotentialVars& v : views) {
    tau = tau + v.tau;
    weighted = weighted + v.tau * v.mu;
  }
  return {weighted / tau, tau};
}

PotentialVars prior_potential(const ad::Var& packed, Index latent_dim) {
  if (packed.rows() != 2 * latent_dim) throw ShapeError("prior potential has the wrong size");
  return {ad::slice_rows(packed, 0, latent_dim),
          ad::exp(-2.0 * ad::slice_rows(packed, latent_dim, latent_dim))};
}

}  // namespace probnerf
