#include "probnerf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "probnerf/ops.hpp"

namespace probnerf {

RealNvpFlow::RealNvpFlow(FlowConfig config) : config_(config) {
  if (config_.latent_dim < 2 || config_.latent_dim % 2 != 0) {
    throw ShapeError("RealNvpFlow: latent_dim must be even and >= 2");
  }
  if (config_.hidden_width < 1) throw ShapeError("RealNvpFlow: hidden_width must be >= 1");
  Rng rng(config_.permutation_seed);
  for (int p = 0; p < 2; ++p) {
    auto& perm = permutations_[static_cast<std::size_t>(p)];
    perm.resize(static_cast<std::size_t>(config_.latent_dim));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    auto& inv = inverse_permutations_[static_cast<std::size_t>(p)];
    inv.resize(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<Index>(i);
  }
}

Index RealNvpFlow::coupling_size() const {
  const Index half = config_.latent_dim / 2, h = config_.hidden_width;
  return h * half + h + 2 * half * h + 2 * half;
}

Vector RealNvpFlow::initialize(Rng& rng) const {
  Vector params = Vector::Zero(parameter_count());
  const Index half = config_.latent_dim / 2, h = config_.hidden_width;
  const double bound = std::sqrt(6.0 / static_cast<double>(half));
  for (int k = 0; k < kCouplings; ++k) {
    const Index base = k * coupling_size();
    for (Index i = 0; i < h * half; ++i) params[base + i] = rng.uniform(-bound, bound);
  }
  return params;
}

void RealNvpFlow::check_input(const ad::Var& x) const {
  if (x.rows() != config_.latent_dim || x.cols() != 1) {
    throw ShapeError("RealNvpFlow: expected a " + std::to_string(config_.latent_dim) +
                     "-vector, got " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  if (!x.value().allFinite()) throw NonFiniteError("flow input");
}

RealNvpFlow::Coupling RealNvpFlow::coupling_net(const ad::Var& params, int layer,
                                                const ad::Var& conditioner) const {
  const Index half = config_.latent_dim / 2, h = config_.hidden_width;
  const Index base = layer * coupling_size();
  ad::Var hidden = ad::relu(ad::affine(params, base, h, half, conditioner));
  ad::Var out = ad::affine(params, base + h * half + h, 2 * half, h, hidden);
  Coupling c;
  c.shift = ad::slice_rows(out, 0, half);
  c.log_scale = config_.log_scale_bound * ad::tanh(ad::slice_rows(out, half, half));
  return c;
}

// Coupling k updates the second half (k even) or the first half (k odd),
// conditioned on the other half.
RealNvpFlow::Result RealNvpFlow::forward(const ad::Var& params, const ad::Var& x) const {
  if (params.rows() != parameter_count()) throw ShapeError("RealNvpFlow: wrong parameter count");
  check_input(x);
  const Index half = config_.latent_dim / 2;
  ad::Var v = x;
  ad::Var log_det;
  for (int k = 0; k < kCouplings; ++k) {
    ad::Var lo = ad::slice_rows(v, 0, half), hi = ad::slice_rows(v, half, half);
    const bool update_hi = (k % 2 == 0);
    Coupling c = coupling_net(params, k, update_hi ? lo : hi);
    ad::Var target = update_hi ? hi : lo;
    ad::Var updated = target * ad::exp(c.log_scale) + c.shift;
    v = update_hi ? ad::concat_rows({lo, updated}) : ad::concat_rows({updated, hi});
    ad::Var ld = ad::sum(c.log_scale);
    log_det = log_det.valid() ? log_det + ld : ld;
    if (k % 2 == 1) v = ad::gather_rows(v, permutations_[static_cast<std::size_t>(k / 2)]);
  }
  return {v, log_det};
}

RealNvpFlow::Result RealNvpFlow::inverse(const ad::Var& params, const ad::Var& z) const {
  if (params.rows() != parameter_count()) throw ShapeError("RealNvpFlow: wrong parameter count");
  check_input(z);
  const Index half = config_.latent_dim / 2;
  ad::Var v = z;
  ad::Var log_det;
  for (int k = kCouplings - 1; k >= 0; --k) {
    if (k % 2 == 1) v = ad::gather_rows(v, inverse_permutations_[static_cast<std::size_t>(k / 2)]);
    ad::Var lo = ad::slice_rows(v, 0, half), hi = ad::slice_rows(v, half, half);
    const bool update_hi = (k % 2 == 0);
    Coupling c = coupling_net(params, k, update_hi ? lo : hi);
    ad::Var target = update_hi ? hi : lo;
    ad::Var restored = (target - c.shift) * ad::exp(-c.log_scale);
    v = update_hi ? ad::concat_rows({lo, restored}) : ad::concat_rows({restored, hi});
    ad::Var ld = -ad::sum(c.log_scale);
    log_det = log_det.valid() ? log_det + ld : ld;
  }
  return {v, log_det};
}

std::pair<Vector, double> RealNvpFlow::forward(const Vector& params, const Vector& x) const {
  ad::Tape tape;
  Result r = forward(tape.constant(params), tape.constant(x));
  return {r.value.value().col(0), r.log_det.scalar()};
}

std::pair<Vector, double> RealNvpFlow::inverse(const Vector& params, const Vector& z) const {
  ad::Tape tape;
  Result r = inverse(tape.constant(params), tape.constant(z));
  return {r.value.value().col(0), r.log_det.scalar()};
}

}  // namespace probnerf
