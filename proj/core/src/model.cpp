#include "probnerf/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "probnerf/ops.hpp"

namespace probnerf {

PreparedObservation prepare_observation(const Observation& obs, const FoamScene& scene,
                                        int encoding_order) {
  if (obs.pixels.cols() != obs.size()) {
    throw ShapeError("observation: " + std::to_string(obs.size()) + " rays but " +
                     std::to_string(obs.pixels.cols()) + " pixels");
  }
  PreparedObservation p;
  p.batch = prepare_foam(obs.rays, scene, encoding_order);
  p.pixels = obs.pixels;
  p.rays = obs.rays;
  return p;
}

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.field = FieldConfig::paper();
  c.scene.grid_size = 128;
  c.latent_dim = 128;
  c.flow_hidden = 512;
  c.hypernet_hidden = 512;
  c.encoder.image_size = 128;
  return c;
}

void ModelConfig::validate() const {
  field.validate();
  scene.validate();
  if (scene.grid_size != field.grid_size) {
    throw ShapeError("ModelConfig: scene grid size must equal the field grid size");
  }
  if (weight_variance < 0.0) throw ShapeError("ModelConfig: weight_variance must be >= 0");
  if (!(observation_scale > 0.0)) throw ShapeError("ModelConfig: observation_scale must be > 0");
}

Vector LatentState::flat() const {
  Vector v(z_tilde.size() + delta.size());
  v << z_tilde, delta;
  return v;
}

LatentState LatentState::from_flat(const Vector& flat, Index latent_dim) {
  if (flat.size() < latent_dim) throw ShapeError("LatentState: vector shorter than the code");
  return {flat.head(latent_dim), flat.tail(flat.size() - latent_dim)};
}

ProbNerfModel::ProbNerfModel(ModelConfig config, ModelParams params)
    : config_(config),
      params_(std::move(params)),
      flow_(FlowConfig{config.latent_dim, config.flow_hidden, config.permutation_seed, 3.0}),
      hypernet_(HypernetConfig{config.latent_dim, config.hypernet_hidden}, config.field),
      encoder_(config.encoder, config.latent_dim) {
  config_.validate();
  check_params();
  flow_values_ = params_.flow;
  hypernet_values_ = params_.hypernet;
}

void ProbNerfModel::set_params(ModelParams params) {
  params_ = std::move(params);
  check_params();
  flow_values_ = params_.flow;
  hypernet_values_ = params_.hypernet;
}

void ProbNerfModel::check_params() const {
  auto check = [](const Vector& v, Index n, const char* name) {
    if (v.size() != n) {
      throw ShapeError(std::string("ProbNerfModel: ") + name + " has " + std::to_string(v.size()) +
                       " parameters, expected " + std::to_string(n));
    }
  };
  check(params_.flow, flow_.parameter_count(), "flow");
  check(params_.hypernet, hypernet_.parameter_count(), "hypernet");
  check(params_.encoder, encoder_.parameter_count(), "encoder");
  check(params_.prior_potential, 2 * config_.latent_dim, "prior potential");
}

ProbNerfModel ProbNerfModel::initialize(const ModelConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const RealNvpFlow flow(FlowConfig{config.latent_dim, config.flow_hidden, config.permutation_seed, 3.0});
  const Hypernet hyper(HypernetConfig{config.latent_dim, config.hypernet_hidden}, config.field);
  const Encoder enc(config.encoder, config.latent_dim);
  ModelParams p;
  p.flow = flow.initialize(rng);
  p.hypernet = hyper.initialize(rng);
  p.encoder = enc.initialize(rng);
  p.prior_potential = Vector::Zero(2 * config.latent_dim);
  return ProbNerfModel(config, std::move(p));
}

FieldWeights ProbNerfModel::decode_code(const Vector& z_tilde) const {
  const Vector z = flow_.forward(params_.flow, z_tilde).first;
  return hypernet_.forward(params_.hypernet, z);
}

FieldWeights ProbNerfModel::decode(const LatentState& state) const {
  FieldWeights w = decode_code(state.z_tilde);
  if (state.delta.size() == 0) return w;
  return perturb_weights(w, state.delta, config_.weight_variance);
}

ad::Var ProbNerfModel::decode(const ad::Var& state, bool latent_only) const {
  const Index k = latent_dim(), d = weight_dim();
  const Index expected = latent_only ? k : k + d;
  if (state.rows() != expected || state.cols() != 1) {
    throw ShapeError("decode: state has " + std::to_string(state.rows()) + " entries, expected " +
                     std::to_string(expected));
  }
  ad::Tape& tape = state.tape();
  ad::Var z_tilde = latent_only ? state : ad::slice_rows(state, 0, k);
  ad::Var z = flow_.forward(tape.reference(flow_values_), z_tilde).value;
  ad::Var w = hypernet_.forward(tape.reference(hypernet_values_), z);
  if (latent_only) return w;
  ad::Var delta = ad::slice_rows(state, k, d);
  return w + std::sqrt(config_.weight_variance) * delta;
}

Vector perturb_weights(const Vector& w, const Vector& delta, double weight_variance) {
  if (w.size() != delta.size()) {
    throw ShapeError("perturb_weights: " + std::to_string(w.size()) + " weights vs " +
                     std::to_string(delta.size()) + " perturbations");
  }
  if (weight_variance < 0.0) throw std::invalid_argument("perturb_weights: negative variance");
  return w + std::sqrt(weight_variance) * delta;
}

FieldWeights perturb_weights(const FieldWeights& w, const Vector& delta, double weight_variance) {
  return FieldWeights(w.config(), perturb_weights(w.flat(), delta, weight_variance));
}

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
}

double log_prior(const LatentState& state) {
  const double n = static_cast<double>(state.z_tilde.size() + state.delta.size());
  return -0.5 * (state.z_tilde.squaredNorm() + state.delta.squaredNorm()) - n * kHalfLog2Pi;
}

ad::Var standard_normal_log_density(const ad::Var& x) {
  const double n = static_cast<double>(x.size());
  return ad::affine_scalar(ad::sum(ad::square(x)), -0.5, -n * kHalfLog2Pi);
}

ad::Var squared_error(const ad::Var& weights, const FieldConfig& config, const SampleBatch& batch,
                      const Matrix& pixels) {
  if (pixels.rows() != 3 || pixels.cols() != batch.ray_count()) {
    throw ShapeError("squared_error: pixel count does not match the ray batch");
  }
  ad::Var rendered = render_batch(weights, config, batch);
  return ad::sum(ad::square(ad::add_const(rendered, -pixels)));
}

double gaussian_log_likelihood(double sse, Index n_scalars, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("observation scale must be positive");
  return -sse / (2.0 * s * s) - static_cast<double>(n_scalars) * (std::log(s) + kHalfLog2Pi);
}

ad::Var gaussian_log_likelihood(const ad::Var& sse, Index n_scalars, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("observation scale must be positive");
  return ad::affine_scalar(sse, -1.0 / (2.0 * s * s),
                           -static_cast<double>(n_scalars) * (std::log(s) + kHalfLog2Pi));
}

double log_likelihood(const FieldWeights& w_tilde, std::span<const Ray> rays,
                      const Eigen::Matrix3Xd& pixels, double s, const FoamScene& scene) {
  if (pixels.cols() != static_cast<Index>(rays.size())) {
    throw ShapeError("log_likelihood: rays and pixels differ in length");
  }
  const SampleBatch batch = prepare_foam(rays, scene, w_tilde.config().encoding_order);
  ad::Tape tape;
  ad::Var w = tape.constant(w_tilde.flat());
  ad::Var sse = squared_error(w, w_tilde.config(), batch, pixels);
  return gaussian_log_likelihood(sse.scalar(), 3 * static_cast<Index>(rays.size()), s);
}

ad::Var log_joint_noncentered(const ProbNerfModel& model, const ad::Var& state,
                              const PreparedObservation& obs, double s, bool latent_only) {
  ad::Var w_tilde = model.decode(state, latent_only);
  ad::Var sse = squared_error(w_tilde, model.config().field, obs.batch, obs.pixels);
  return standard_normal_log_density(state) + gaussian_log_likelihood(sse, 3 * obs.pixels.cols(), s);
}

double log_joint_noncentered(const ProbNerfModel& model, const LatentState& state,
                             const Observation& obs, double s) {
  const PreparedObservation prepared =
      prepare_observation(obs, model.scene(), model.config().field.encoding_order);
  ad::Tape tape;
  const bool latent_only = state.delta.size() == 0;
  ad::Var x = tape.constant(state.flat());
  return log_joint_noncentered(model, x, prepared, s, latent_only).scalar();
}

std::pair<LatentState, FieldWeights> sample_prior(const ProbNerfModel& model, std::uint64_t seed) {
  Rng rng(seed);
  LatentState state;
  state.z_tilde = rng.normal_vector(model.latent_dim());
  state.delta = rng.normal_vector(model.weight_dim());
  FieldWeights w = model.decode(state);
  return {std::move(state), std::move(w)};
}

}  // namespace probnerf
