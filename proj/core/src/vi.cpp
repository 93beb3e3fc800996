#include "probnerf/vi.hpp"

#include <cmath>
#include <string>

#include "probnerf/errors.hpp"

namespace probnerf {

namespace {

struct Draw {
  Vector gradient;
  double elbo = 0.0;
};

Draw vi_draw(const TemperedTarget& target, const VIParams& params, double s, bool stl, Rng& rng) {
  const Index n = params.mu.size();
  const Vector eps = rng.normal_vector(n);
  const Vector sigma = params.log_sigma.array().exp().matrix();
  const Vector x = params.mu + sigma.cwiseProduct(eps);
  const TargetEvaluation e = target.evaluate(x, target.stochastic() ? rng.next_u64() : 0);
  const Vector g = e.gradient(s);
  Draw d;
  d.gradient.resize(2 * n);
  if (stl) {
    // Path derivative of log p(x) - log q(x) with q's parameters held fixed.
    const Vector path = g + eps.cwiseQuotient(sigma);
    d.gradient.head(n) = path;
    d.gradient.tail(n) = path.cwiseProduct(sigma).cwiseProduct(eps);
  } else {
    d.gradient.head(n) = g;
    d.gradient.tail(n) = (g.cwiseProduct(sigma).cwiseProduct(eps)).array() + 1.0;
  }
  constexpr double kHalfLog2PiE = 1.41893853320467274178;  // 0.5 * log(2 pi e)
  d.elbo = e.log_density(s) + params.log_sigma.sum() + static_cast<double>(n) * kHalfLog2PiE;
  return d;
}

}  // namespace

Vector vi_gradient(const TemperedTarget& target, const VIParams& params, double s, bool stl, Rng& rng) {
  return vi_draw(target, params, s, stl, rng).gradient;
}

VIParams fit_vi(const TemperedTarget& target, const ViConfig& config, ViTrace* trace) {
  VIParams init{Vector::Zero(target.dim()), Vector::Constant(target.dim(), config.initial_log_sigma)};
  return fit_vi(target, config, std::move(init), trace);
}

VIParams fit_vi(const TemperedTarget& target, const ViConfig& config, VIParams params, ViTrace* trace) {
  if (config.steps < 0) throw std::invalid_argument("fit_vi: negative step count");
  if (params.mu.size() != target.dim() || params.log_sigma.size() != target.dim()) {
    throw ShapeError("fit_vi: parameters do not match the target dimension");
  }
  const Index n = target.dim();
  Vector packed(2 * n);
  packed << params.mu, params.log_sigma;
  Adam adam(2 * n, Adam::Options{config.learning_rate, 0.9, 0.999, 1e-8});
  Rng rng(config.seed);
  for (int step = 0; step < config.steps; ++step) {
    Draw d;
    try {
      d = vi_draw(target, params, config.observation_scale, config.sticking_the_landing, rng);
    } catch (const NonFiniteError& e) {
      throw InferenceError("fit_vi: non-finite value at step " + std::to_string(step) + " in " + e.primitive());
    }
    if (!d.gradient.allFinite() || !std::isfinite(d.elbo)) {
      throw InferenceError("fit_vi: non-finite gradient at step " + std::to_string(step));
    }
    adam.ascend(packed, d.gradient);
    params.mu = packed.head(n);
    params.log_sigma = packed.tail(n);
    if (trace) trace->elbo.push_back(d.elbo);
  }
  return params;
}

std::vector<Vector> sample_vi(const VIParams& params, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_vi: negative sample count");
  Rng rng(seed);
  const Vector sigma = params.log_sigma.array().exp().matrix();
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i) out.push_back(params.mu + sigma.cwiseProduct(rng.normal_vector(params.mu.size())));
  return out;
}

double vi_gradient_variance(const TemperedTarget& target, const VIParams& params, double s, bool stl, int draws,
                            std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("vi_gradient_variance: need at least 2 draws");
  Rng rng(seed);
  const Index m = 2 * params.mu.size();
  Vector sum = Vector::Zero(m), sum_sq = Vector::Zero(m);
  for (int i = 0; i < draws; ++i) {
    const Vector g = vi_gradient(target, params, s, stl, rng);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  const double d = draws;
  const Vector var = (sum_sq - sum.cwiseProduct(sum) / d) / (d - 1.0);
  return var.mean();
}

}  // namespace probnerf
