#include "probnerf/hmc.hpp"

#include <cmath>
#include <sstream>

#include "probnerf/errors.hpp"
#include "probnerf/parallel.hpp"

namespace probnerf {

void AnnealingSchedule::validate() const {
  if (!(sT > 0.0) || !(s0 >= sT)) throw std::invalid_argument("annealing schedule needs s0 >= sT > 0");
  if (steps < 1) throw std::invalid_argument("annealing schedule needs at least one step");
  if (!(base_step > 0.0)) throw std::invalid_argument("annealing schedule needs a positive base step");
}

double schedule_noise(const AnnealingSchedule& schedule, int t) {
  schedule.validate();
  if (t < 0 || t > schedule.steps) {
    throw std::out_of_range("schedule step " + std::to_string(t) + " outside [0, " +
                            std::to_string(schedule.steps) + "]");
  }
  if (t == 0) return schedule.s0;
  if (t == schedule.steps) return schedule.sT;
  const double f = static_cast<double>(t) / schedule.steps;
  return std::exp((1.0 - f) * std::log(schedule.s0) + f * std::log(schedule.sT));
}

double schedule_step_size(const AnnealingSchedule& schedule, int t) {
  return schedule.base_step * schedule_noise(schedule, t) / schedule.s0;
}

LeapfrogResult leapfrog(const Vector& position, const Vector& momentum, double step, int n_steps,
                        const GradientFn& grad_log_density, const Vector* initial_gradient) {
  if (!(step > 0.0)) throw std::invalid_argument("leapfrog: step must be positive");
  if (n_steps < 1) throw std::invalid_argument("leapfrog: n_steps must be >= 1");
  LeapfrogResult r{position, momentum, false};
  Vector g = initial_gradient ? *initial_gradient : grad_log_density(position);
  if (!g.allFinite()) {
    r.divergent = true;
    return r;
  }
  r.momentum += 0.5 * step * g;
  for (int i = 0; i < n_steps; ++i) {
    r.position += step * r.momentum;
    g = grad_log_density(r.position);
    if (!g.allFinite() || !r.position.allFinite()) {
      r.divergent = true;
      return r;
    }
    r.momentum += (i + 1 < n_steps ? 1.0 : 0.5) * step * g;
  }
  return r;
}

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;

void standard_normal_prior(const Vector& x, TargetEvaluation& e) {
  e.log_prior = -0.5 * x.squaredNorm() - static_cast<double>(x.size()) * kHalfLog2Pi;
  e.prior_gradient = -x;
}
}  // namespace

double TargetEvaluation::log_density(double s) const {
  if (sse_gradient.size() == 0 && n_scalars == 0) return log_prior;
  return log_prior + gaussian_log_likelihood(sse, n_scalars, s);
}

Vector TargetEvaluation::gradient(double s) const {
  if (sse_gradient.size() == 0) return prior_gradient;
  return prior_gradient - sse_gradient / (2.0 * s * s);
}

bool TargetEvaluation::finite() const {
  return std::isfinite(log_prior) && std::isfinite(sse) && prior_gradient.allFinite() &&
         sse_gradient.allFinite();
}

TargetEvaluation FunctionTarget::evaluate(const Vector& x, std::uint64_t) const {
  TargetEvaluation e;
  e.prior_gradient = Vector::Zero(dim_);
  e.log_prior = fn_(x, e.prior_gradient);
  return e;
}

FoamTarget::FoamTarget(const ProbNerfModel& model, const Observation& obs, bool latent_only)
    : model_(model),
      obs_(prepare_observation(obs, model.scene(), model.config().field.encoding_order)),
      latent_only_(latent_only) {}

Index FoamTarget::dim() const { return latent_only_ ? model_.latent_dim() : model_.state_dim(); }

namespace {

TargetEvaluation evaluate_batch(const ProbNerfModel& model, const Vector& x, bool latent_only,
                                const SampleBatch& batch, const Matrix& pixels) {
  TargetEvaluation e;
  standard_normal_prior(x, e);
  ad::Tape tape;
  ad::Var state = tape.variable(x);
  ad::Var sse = squared_error(model.decode(state, latent_only), model.config().field, batch, pixels);
  tape.backward(sse);
  e.sse = sse.scalar();
  e.sse_gradient = tape.gradient(state);
  e.n_scalars = 3 * pixels.cols();
  return e;
}

}  // namespace

TargetEvaluation FoamTarget::evaluate(const Vector& x, std::uint64_t) const {
  return evaluate_batch(model_, x, latent_only_, obs_.batch, obs_.pixels);
}

QuadratureTarget::QuadratureTarget(const ProbNerfModel& model, const Observation& obs, int n_samples,
                                   bool latent_only)
    : model_(model), obs_(obs), n_samples_(n_samples), latent_only_(latent_only) {
  if (n_samples < 1) throw std::invalid_argument("QuadratureTarget: n_samples must be >= 1");
}

Index QuadratureTarget::dim() const { return latent_only_ ? model_.latent_dim() : model_.state_dim(); }

TargetEvaluation QuadratureTarget::evaluate(const Vector& x, std::uint64_t seed) const {
  const SampleBatch batch =
      prepare_quadrature(obs_.rays, model_.scene(), model_.config().field.encoding_order, n_samples_, seed);
  return evaluate_batch(model_, x, latent_only_, batch, obs_.pixels);
}

namespace {

// Evaluation that reports failure as non-finite values instead of throwing.
TargetEvaluation safe_evaluate(const TemperedTarget& target, const Vector& x, std::uint64_t seed) {
  try {
    return target.evaluate(x, seed);
  } catch (const NonFiniteError&) {
    TargetEvaluation e;
    e.log_prior = std::numeric_limits<double>::quiet_NaN();
    e.prior_gradient = Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
    return e;
  }
}

}  // namespace

ChainState init_chain(const TemperedTarget& target, Vector position, std::uint64_t seed) {
  if (position.size() != target.dim()) throw ShapeError("init_chain: position has the wrong dimension");
  ChainState c;
  c.rng = Rng(seed);
  const std::uint64_t eval_seed = target.stochastic() ? c.rng.next_u64() : 0;
  c.current = safe_evaluate(target, position, eval_seed);
  if (!c.current.finite()) throw InferenceError("init_chain: target is not finite at the initial position");
  c.position = std::move(position);
  return c;
}

StepInfo hmc_step(ChainState& chain, const TemperedTarget& target, double s, double step, int n_leapfrog) {
  StepInfo info;
  const Vector p0 = chain.rng.normal_vector(chain.position.size());
  const std::uint64_t seed = target.stochastic() ? chain.rng.next_u64() : 0;
  const double u = chain.rng.uniform();
  ++chain.proposals;
  chain.step_size = step;

  Vector start_gradient;
  if (target.stochastic()) {
    start_gradient = safe_evaluate(target, chain.position, seed).gradient(s);
    ++chain.gradient_evaluations;
  } else {
    start_gradient = chain.current.gradient(s);
  }
  TargetEvaluation last;
  const GradientFn grad = [&](const Vector& x) {
    ++chain.gradient_evaluations;
    last = safe_evaluate(target, x, seed);
    return last.finite() ? last.gradient(s) : Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
  };
  const LeapfrogResult r = leapfrog(chain.position, p0, step, n_leapfrog, grad, &start_gradient);

  const double h0 = -chain.current.log_density(s) + 0.5 * p0.squaredNorm();
  const double h1 = r.divergent ? std::numeric_limits<double>::infinity()
                                : -last.log_density(s) + 0.5 * r.momentum.squaredNorm();
  info.divergent = r.divergent || !std::isfinite(h1);
  if (info.divergent) {
    ++chain.divergences;
    return info;
  }
  info.accept_prob = std::min(1.0, std::exp(h0 - h1));
  if (u < info.accept_prob) {
    info.accepted = true;
    ++chain.accepted;
    chain.position = r.position;
    chain.current = std::move(last);
  }
  return info;
}

std::vector<Vector> ChainSet::all_samples() const {
  std::vector<Vector> out;
  for (const ChainResult& c : chains) out.insert(out.end(), c.samples.begin(), c.samples.end());
  return out;
}

std::size_t ChainSet::sample_count() const {
  std::size_t n = 0;
  for (const ChainResult& c : chains) n += c.samples.size();
  return n;
}

ChainSet run_chains(const TemperedTarget& target, const HmcConfig& config, const std::vector<Vector>& initial) {
  config.schedule.validate();
  if (config.n_chains < 1) throw std::invalid_argument("run_chains: n_chains must be >= 1");
  if (config.n_leapfrog < 1) throw std::invalid_argument("run_chains: n_leapfrog must be >= 1");
  if (config.keep_last < 1 || config.keep_last > config.schedule.steps) {
    throw std::invalid_argument("run_chains: keep_last must lie in [1, T]");
  }
  if (!config.anneal && !(config.fixed_step > 0.0)) throw std::invalid_argument("run_chains: fixed_step must be positive");
  if (!initial.empty() && static_cast<int>(initial.size()) != config.n_chains) {
    throw std::invalid_argument("run_chains: need one initial position per chain");
  }
  ChainSet set{config, std::vector<ChainResult>(static_cast<std::size_t>(config.n_chains))};
  const int T = config.schedule.steps;

  parallel_for(config.n_chains, [&](int c) {
    ChainResult& out = set.chains[static_cast<std::size_t>(c)];
    out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(c));
    Vector start;
    if (initial.empty()) {
      Rng init_rng(derive_seed(out.seed, 0));
      start = init_rng.normal_vector(target.dim());
    } else {
      start = initial[static_cast<std::size_t>(c)];
    }
    ChainState chain = init_chain(target, std::move(start), derive_seed(out.seed, 1));
    for (int t = 1; t <= T; ++t) {
      const double s = config.anneal ? schedule_noise(config.schedule, t) : config.schedule.sT;
      const double step = config.anneal ? schedule_step_size(config.schedule, t) : config.fixed_step;
      const StepInfo info = hmc_step(chain, target, s, step, config.n_leapfrog);
      chain.t = t;
      out.diagnostics.push_back({t, s, step, info.accept_prob, chain.current.log_density(s)});
      if (t > T - config.keep_last) {
        out.samples.push_back(chain.position);
        out.sample_steps.push_back(t);
      }
    }
    out.accepted = chain.accepted;
    out.proposals = chain.proposals;
    out.divergences = chain.divergences;
    out.gradient_evaluations = chain.gradient_evaluations;
    out.final_log_joint = out.diagnostics.back().log_joint;
  }, config.threads);

  bool all_divergent = true;
  for (const ChainResult& c : set.chains) all_divergent &= c.divergences == c.proposals;
  if (all_divergent) {
    std::ostringstream msg;
    msg << "every chain diverged on every proposal:";
    for (const ChainResult& c : set.chains) {
      msg << " [seed " << c.seed << ": " << c.divergences << "/" << c.proposals << " divergent]";
    }
    throw InferenceError(msg.str());
  }
  return set;
}

ChainSet run_annealed_chains(const ProbNerfModel& model, const Observation& obs, const HmcConfig& config) {
  const FoamTarget target(model, obs, false);
  return run_chains(target, config);
}

ChainSet run_latent_only_chains(const ProbNerfModel& model, const Observation& obs, const HmcConfig& config) {
  const FoamTarget target(model, obs, true);
  return run_chains(target, config);
}

FieldWeights state_weights(const ProbNerfModel& model, const Vector& state, bool latent_only) {
  if (latent_only) {
    if (state.size() != model.latent_dim()) throw ShapeError("state_weights: expected a latent-only state");
    return model.decode_code(state);
  }
  if (state.size() != model.state_dim()) throw ShapeError("state_weights: state has the wrong dimension");
  return model.decode(LatentState::from_flat(state, model.latent_dim()));
}

}  // namespace probnerf
