// Acceptance suite: one PASS/FAIL line per criterion. Trained models are
// cached under --cache-dir keyed by their full training configuration.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "probnerf/ablation.hpp"
#include "probnerf/archive.hpp"
#include "probnerf/checkpoint.hpp"
#include "probnerf/dataset.hpp"
#include "probnerf/evaluation.hpp"
#include "probnerf/flow.hpp"
#include "probnerf/hmc.hpp"
#include "probnerf/metrics.hpp"
#include "probnerf/modulation.hpp"
#include "probnerf/train.hpp"
#include "probnerf/vae.hpp"
#include "probnerf/vi.hpp"
#include "probnerf/voxel.hpp"

using namespace probnerf;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
  double extra_seconds = 0.0;  // time spent outside the criterion body (cached training)
};

// ---------------------------------------------------------------------------
// Shared desk-scale setup

constexpr int kTestObjects = 5;
constexpr std::uint64_t kTestSeedBase = 1000;

CameraRig inference_rig() { return CameraRig{3.0, 60.0 * std::numbers::pi / 180.0, 16, 16}; }

DatasetSpec training_data_spec() {
  DatasetSpec s;
  s.n_objects = 64;
  s.views_per_object = 10;
  s.image_size = 32;
  s.seed = 7;
  s.family = "two-limb";
  return s;
}

TrainConfig desk_train_config() {
  TrainConfig c;
  c.iterations = 10000;
  c.adam.learning_rate = 1e-3;
  c.batch = {4, 5, 256};
  c.seed = 0;
  c.log_every = 1000;
  return c;
}

TrainConfig reduced_train_config() {
  TrainConfig c = desk_train_config();
  c.iterations = 4000;
  c.model.hypernet_hidden = 8;
  return c;
}

HmcConfig desk_hmc_config(std::uint64_t seed) {
  HmcConfig c;
  c.schedule = {5.0, 0.1, 50, 0.6};
  c.n_chains = 8;
  c.n_leapfrog = 20;
  c.keep_last = 16;
  c.seed = seed;
  return c;
}

struct TrainedModel {
  ProbNerfModel model;
  double train_seconds = 0.0;
  bool cached = false;
};

class ModelCache {
 public:
  explicit ModelCache(fs::path dir) : dir_(std::move(dir)) {}

  const TrainedModel& get(const std::string& name, const TrainConfig& config, const DatasetSpec& data) {
    auto it = models_.find(name);
    if (it != models_.end()) return it->second;
    const json key{{"train", json::parse(train_config_to_json(config))},
                   {"data", json::parse(dataset_spec_to_json(data))}};
    const fs::path ckpt = dir_ / (name + ".ckpt"), meta = dir_ / (name + ".json");
    if (fs::exists(ckpt) && fs::exists(meta)) {
      std::ifstream in(meta);
      const json m = json::parse(in);
      if (m.at("key") == key) {
        std::cout << "  using cached " << name << " model (" << ckpt.string() << ")\n";
        return models_.emplace(name, TrainedModel{load_checkpoint(ckpt), m.at("train_seconds").get<double>(), true})
            .first->second;
      }
    }
    std::cout << "  training " << name << " model: " << config.iterations << " iterations" << std::endl;
    const auto start = Clock::now();
    const Dataset dataset = generate_dataset(data);
    const ProbNerfModel initial = ProbNerfModel::initialize(config.model, derive_seed(config.seed, 0xC0FFEE));
    const TrainResult result = train(config, dataset, initial, [](const TrainLogRow& row) {
      std::cout << "    iter " << row.iteration << " elbo " << fmt(row.elbo, 7) << " (" << fmt(row.wall_time_s, 4)
                << " s)" << std::endl;
    });
    const double seconds = seconds_since(start);
    fs::create_directories(dir_);
    save_checkpoint(ckpt, result.model);
    std::ofstream(meta) << json{{"key", key}, {"train_seconds", seconds}}.dump(2) << "\n";
    return models_.emplace(name, TrainedModel{load_checkpoint(ckpt), seconds, false}).first->second;
  }

 private:
  fs::path dir_;
  std::map<std::string, TrainedModel> models_;
};

struct TestObject {
  VoxelObject object;
  View front;
  View back;
  View three_quarter;
};

TestObject test_object(const ProbNerfModel& model, int i) {
  VoxelObject object = generate_object(kTestSeedBase + static_cast<std::uint64_t>(i), ShapeFamily::kTwoLimb, model.scene());
  auto view = [&](double azimuth) {
    const Camera cam = camera_at_azimuth(azimuth, inference_rig());
    return View{oracle_render(object, cam, model.scene().background), cam, azimuth};
  };
  View front = view(0.0), back = view(std::numbers::pi), three_quarter = view(std::numbers::pi / 4);
  return {std::move(object), std::move(front), std::move(back), std::move(three_quarter)};
}

SampleArchive vi_archive(const ProbNerfModel& model, const VIParams& params, int n, std::uint64_t seed) {
  SampleArchive a;
  a.method = "vi";
  a.n_chains = 1;
  a.keep_last = n;
  a.latent_dim = model.latent_dim();
  a.weight_dim = model.weight_dim();
  a.seed = seed;
  a.states = sample_vi(params, n, seed);
  for (int i = 0; i < n; ++i) {
    a.sample_chain.push_back(0);
    a.sample_step.push_back(i);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome architecture_fidelity() {
  const Index weights = FieldConfig::paper().weight_count();
  const std::vector<double> scalar{0.3};
  const Index features = positional_encode(scalar, FieldConfig::paper().encoding_order).size();
  return {weights == 20868 && features == 21,
          "weight count " + std::to_string(weights) + " (want 20868), features per scalar " + std::to_string(features) +
              " (want 21)"};
}

Ray random_ray(Rng& rng) {
  Eigen::Vector3d origin(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
  if (origin.norm() < 1.8) origin *= 1.8 / origin.norm();
  const Eigen::Vector3d target(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
  return {origin, (target - origin).normalized()};
}

Outcome renderer_exactness() {
  Rng rng(2024);
  const FieldConfig cfg{4, 32, 2, 8};
  const FoamScene scene{8};
  const FieldWeights w = FieldWeights::random(cfg, rng);
  double worst = 0.0;
  int most = 0, mismatched_counts = 0;
  for (int i = 0; i < 1000; ++i) {
    const Ray ray = random_ray(rng);
    int oracle_evaluations = 0;
    const Eigen::Vector3d ref = oracle::render_ray(w.flat(), cfg, ray, scene, &oracle_evaluations);
    worst = std::max(worst, (ref - render_ray_foam(w, ray, scene)).cwiseAbs().maxCoeff());
    const int evaluations = static_cast<int>(foam_intersections(ray, scene).size());
    mismatched_counts += evaluations != oracle_evaluations;
    most = std::max(most, evaluations);
  }
  const int bound = 3 * (scene.grid_size + 1);
  return {worst < 1e-6 && most <= bound && mismatched_counts == 0,
          "max color deviation " + fmt(worst) + " (< 1e-6), max field evaluations per ray " + std::to_string(most) +
              " (<= " + std::to_string(bound) + "), evaluation-count mismatches vs oracle " +
              std::to_string(mismatched_counts)};
}

ModelConfig reduced_model_config() {
  ModelConfig c;
  c.field = {2, 6, 2, 4};
  c.scene.grid_size = 4;
  c.latent_dim = 4;
  c.flow_hidden = 8;
  c.hypernet_hidden = 8;
  c.weight_variance = 0.05;
  c.encoder.image_size = 8;
  c.encoder.channels = {2, 3, 3, 3, 3};
  c.encoder.camera_hidden = 4;
  return c;
}

Outcome differentiability() {
  constexpr double kTol = 1e-3;
  std::vector<std::pair<std::string, double>> errors;

  {
    Rng rng(5);
    const FieldConfig cfg{2, 6, 2, 4};
    const FoamScene scene{4};
    const Camera cam = Camera::look_at({0.4, 0.3, 3}, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), 0.7, 3, 3);
    const std::vector<Ray> rays = generate_rays(cam);
    const SampleBatch batch = prepare_foam(rays, scene, cfg.encoding_order);
    const Matrix mix = Matrix::NullaryExpr(3, static_cast<Index>(rays.size()), [&] { return rng.normal(); });
    ad::ScalarFn f = [&](ad::Tape&, const ad::Var& w) { return ad::sum(ad::mul_const(render_batch(w, cfg, batch), mix)); };
    const Vector w = FieldWeights::random(cfg, rng).flat() + 0.1 * rng.normal_vector(cfg.weight_count());
    errors.emplace_back("render_ray_foam wrt weights", ad::check_gradient(f, w, 1e-5).max_relative_error);
  }

  const ModelConfig cfg = reduced_model_config();
  ProbNerfModel model = ProbNerfModel::initialize(cfg, 4);
  Rng rng(6);
  ModelParams p = model.params();
  p.flow += 0.2 * rng.normal_vector(p.flow.size());
  p.prior_potential = 0.2 * rng.normal_vector(p.prior_potential.size());
  model.set_params(p);

  {
    const Camera cam = Camera::look_at({0.2, 0.1, 3}, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), 0.8, 3, 3);
    const Observation obs{generate_rays(cam), Eigen::Matrix3Xd::Constant(3, 9, 0.6)};
    const PreparedObservation prep = prepare_observation(obs, cfg.scene, cfg.field.encoding_order);
    ad::ScalarFn f = [&](ad::Tape&, const ad::Var& x) { return log_joint_noncentered(model, x, prep, 0.3); };
    errors.emplace_back("log_joint_noncentered wrt (z~, delta)",
                        ad::check_gradient(f, rng.normal_vector(model.state_dim()), 1e-5).max_relative_error);
  }

  {
    const RealNvpFlow flow(FlowConfig{4, 8, 1, 3.0});
    const Vector params = flow.initialize(rng) + 0.5 * rng.normal_vector(flow.parameter_count());
    ad::ScalarFn f = [&](ad::Tape& t, const ad::Var& x) { return flow.forward(t.constant(params), x).log_det; };
    errors.emplace_back("flow log-det wrt z~", ad::check_gradient(f, rng.normal_vector(4), 1e-4).max_relative_error);
  }

  {
    DatasetSpec spec;
    spec.n_objects = 2;
    spec.views_per_object = 2;
    spec.image_size = 8;
    spec.seed = 3;
    spec.scene.grid_size = 4;
    const Dataset data = generate_dataset(spec);
    const TrainBatch batch = make_train_batch(data, BatchSpec{2, 2, 12}, cfg.scene, cfg.field.encoding_order, 3);
    ad::ScalarFn f = [&](ad::Tape&, const ad::Var& x) { return elbo_estimate(model, x, batch, {}, 9); };
    const Vector x = pack_params(model.params());
    std::vector<Index> coords;
    for (Index i = 0; i < x.size(); i += 17) coords.push_back(i);
    errors.emplace_back("ELBO wrt (theta, zeta, phi)", ad::check_gradient(f, x, 1e-5, coords).max_relative_error);
  }

  bool pass = true;
  std::string detail;
  for (const auto& [name, err] : errors) {
    pass &= err < kTol;
    detail += (detail.empty() ? "" : "; ") + name + " " + fmt(err, 3);
  }
  return {pass, "max rel err (< 1e-3): " + detail};
}

Outcome sampler_correctness() {
  const Index dim = 10;
  const FunctionTarget target(dim, [](const Vector& x, Vector& g) {
    g = -x;
    return -0.5 * x.squaredNorm();
  });
  HmcConfig cfg;
  cfg.schedule = {1.0, 1.0, 600, 0.3};
  cfg.anneal = false;
  cfg.fixed_step = 0.3;
  cfg.n_chains = 8;
  cfg.n_leapfrog = 5;
  cfg.keep_last = 500;
  cfg.seed = 11;
  const std::vector<Vector> samples = run_chains(target, cfg).all_samples();
  Vector mean = Vector::Zero(dim), sq = Vector::Zero(dim);
  for (const Vector& s : samples) {
    mean += s;
    sq += s.cwiseAbs2();
  }
  const double n = static_cast<double>(samples.size());
  mean /= n;
  const Vector var = (sq / n - mean.cwiseAbs2()) * n / (n - 1);
  const double worst_mean = mean.cwiseAbs().maxCoeff();
  const bool moments = samples.size() == 4000 && worst_mean <= 0.1 && var.minCoeff() >= 0.8 && var.maxCoeff() <= 1.2;

  const GradientFn anharmonic = [](const Vector& x) {
    Vector g = -x.array().cube() - x.array();
    return g;
  };
  Rng rng(3);
  const Vector q = rng.normal_vector(dim), p = rng.normal_vector(dim);
  const auto fwd = leapfrog(q, p, 0.05, 40, anharmonic);
  const auto back = leapfrog(fwd.position, -fwd.momentum, 0.05, 40, anharmonic);
  const double reversibility =
      std::max((back.position - q).cwiseAbs().maxCoeff(), (back.momentum + p).cwiseAbs().maxCoeff());

  const GradientFn gaussian = [](const Vector& x) {
    Vector g = -x;
    return g;
  };
  auto energy = [](const Vector& x, const Vector& m) { return 0.5 * x.squaredNorm() + 0.5 * m.squaredNorm(); };
  const double h0 = energy(q, p);
  const auto coarse = leapfrog(q, p, 0.1, 10, gaussian);
  const auto fine = leapfrog(q, p, 0.05, 20, gaussian);
  const double ratio = std::abs(energy(coarse.position, coarse.momentum) - h0) /
                       std::abs(energy(fine.position, fine.momentum) - h0);

  const bool pass = moments && reversibility < 1e-8 && std::abs(ratio - 4.0) <= 0.5;
  return {pass, std::to_string(samples.size()) + " draws: max |mean| " + fmt(worst_mean, 3) + " (<= 0.1), variance in [" +
                    fmt(var.minCoeff(), 4) + ", " + fmt(var.maxCoeff(), 4) + "] (within [0.8, 1.2]); reversibility " +
                    fmt(reversibility, 3) + " (< 1e-8); dH ratio " + fmt(ratio, 4) + " (4 +- 0.5)"};
}

Outcome renderer_ablation(ModelCache& cache) {
  const TrainedModel& tm = cache.get("desk", desk_train_config(), training_data_spec());
  RendererAblationConfig cfg;
  cfg.rig = inference_rig();
  cfg.seed = 5;
  const std::vector<AcceptanceRow> rows = ablate_renderer(tm.model, cfg);
  double foam_smallest = -1.0, quadrature_worst = 0.0;
  std::string table;
  for (const AcceptanceRow& r : rows) {
    std::cout << "    " << r.renderer << " step " << fmt(r.step_size, 3) << " acceptance " << fmt(r.acceptance, 4) << "\n";
    if (r.renderer == "foam" && r.step_size == cfg.step_sizes.front()) foam_smallest = r.acceptance;
    if (r.renderer == "quadrature") quadrature_worst = std::max(quadrature_worst, r.acceptance);
  }
  return {foam_smallest > 0.6 && quadrature_worst < 0.2,
          "foam acceptance at step " + fmt(cfg.step_sizes.front(), 3) + " = " + fmt(foam_smallest, 4) +
              " (> 0.6); max quadrature acceptance over sweep " + fmt(quadrature_worst, 4) + " (< 0.2)"};
}

Outcome annealing_ablation(ModelCache& cache) {
  const TrainedModel& tm = cache.get("desk", desk_train_config(), training_data_spec());
  const TestObject t = test_object(tm.model, 0);
  const Observation obs = full_view(t.front.image, t.front.camera);
  std::vector<double> annealed, fixed;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    AnnealingAblationConfig cfg;
    cfg.hmc = desk_hmc_config(100 + seed);
    const AnnealingAblationReport r = ablate_annealing(tm.model, obs, cfg);
    std::cout << "    seed " << seed << ": annealed spread " << fmt(r.annealed_spread) << ", fixed spread "
              << fmt(r.fixed_spread) << "\n";
    annealed.push_back(r.annealed_spread);
    fixed.push_back(r.fixed_spread);
  }
  const double a = median(annealed), f = median(fixed);
  return {a < f, "median across-chain std of conditioned-view MSE: annealed " + fmt(a) + " vs fixed " + fmt(f) +
              " (want annealed < fixed)"};
}

Outcome diversity_ordering(ModelCache& cache) {
  const TrainedModel& tm = cache.get("desk", desk_train_config(), training_data_spec());
  const ProbNerfModel& model = tm.model;
  std::vector<double> hmc_var, vi_var, hmc_psnr, vi_psnr;
  for (int i = 0; i < kTestObjects; ++i) {
    const TestObject t = test_object(model, i);
    const Observation obs = full_view(t.front.image, t.front.camera);
    const std::vector<View> views{t.front, t.back};
    const ChainSet set = run_annealed_chains(model, obs, desk_hmc_config(200 + static_cast<std::uint64_t>(i)));
    const EvalReport h = evaluate_samples(model, archive_from_chains(set, model.latent_dim(), model.weight_dim(), "hmc"), views);
    const FoamTarget target(model, obs);
    ViConfig vc;
    vc.seed = 300 + static_cast<std::uint64_t>(i);
    const EvalReport v = evaluate_samples(model, vi_archive(model, fit_vi(target, vc), 16, vc.seed + 1), views);
    hmc_psnr.push_back(h.views[0].mean_psnr);
    vi_psnr.push_back(v.views[0].mean_psnr);
    hmc_var.push_back(h.views[1].mean_variance);
    vi_var.push_back(v.views[1].mean_variance);
    std::cout << "    object " << i << " (hidden limb " << fmt(t.object.limb_angle * 180 / std::numbers::pi, 3)
              << " deg): HMC psnr " << fmt(hmc_psnr.back()) << " held-out var " << fmt(hmc_var.back()) << " | VI psnr "
              << fmt(vi_psnr.back()) << " held-out var " << fmt(vi_var.back()) << std::endl;
  }
  const double hv = median(hmc_var), vv = median(vi_var), hp = median(hmc_psnr), vp = median(vi_psnr);
  Outcome o{hv > vv && hp > 20.0 && vp > 20.0,
            "median held-out variance HMC " + fmt(hv) + " vs VI " + fmt(vv) + " (want HMC > VI); median conditioned PSNR HMC " + fmt(hp) +
                " dB, VI " + fmt(vp) + " dB (> 20)"};
  o.extra_seconds = tm.train_seconds;
  if (tm.cached) o.detail += "; includes " + fmt(tm.train_seconds, 4) + " s of cached training";
  return o;
}

Outcome latent_only_ablation(ModelCache& cache) {
  const TrainedModel& tm = cache.get("reduced-hypernet", reduced_train_config(), training_data_spec());
  const ProbNerfModel& model = tm.model;
  std::vector<double> full, latent;
  for (int i = 0; i < kTestObjects; ++i) {
    const TestObject t = test_object(model, i);
    const Observation obs = full_view(t.three_quarter.image, t.three_quarter.camera);
    const std::vector<View> views{t.three_quarter};
    const HmcConfig cfg = desk_hmc_config(400 + static_cast<std::uint64_t>(i));
    const ChainSet fs_set = run_annealed_chains(model, obs, cfg);
    const ChainSet lo_set = run_latent_only_chains(model, obs, cfg);
    full.push_back(evaluate_samples(model, archive_from_chains(fs_set, model.latent_dim(), model.weight_dim(), "hmc"), views)
                       .views[0]
                       .mean_psnr);
    latent.push_back(evaluate_samples(model, archive_from_chains(lo_set, model.latent_dim(), 0, "hmc-latent-only"), views)
                         .views[0]
                         .mean_psnr);
    std::cout << "    object " << i << ": full-state psnr " << fmt(full.back()) << ", latent-only psnr "
              << fmt(latent.back()) << std::endl;
  }
  const double f = median(full), l = median(latent);
  Outcome o{f >= l, "median conditioned-view PSNR full-state " + fmt(f) + " dB vs latent-only " + fmt(l) + " dB (want full >= latent-only)"};
  o.extra_seconds = tm.train_seconds;
  o.detail += "; includes " + fmt(tm.train_seconds, 4) + " s of training (hypernet width " +
              std::to_string(model.config().hypernet_hidden) + ")";
  return o;
}

Outcome posterior_self_consistency(ModelCache& cache) {
  const TrainedModel& tm = cache.get("desk", desk_train_config(), training_data_spec());
  const ProbNerfModel& model = tm.model;
  const auto [state, weights] = sample_prior(model, 123);
  const Camera cam = camera_at_azimuth(0.0, inference_rig());
  const Observation obs = full_view(render_image(weights, cam, model.scene()), cam);
  const HmcConfig cfg = desk_hmc_config(500);
  const ChainSet set = run_annealed_chains(model, obs, cfg);
  double best = std::numeric_limits<double>::infinity();
  for (const ChainResult& c : set.chains) best = std::min(best, observation_mse(model, c.samples.back(), false, obs));
  const double bound = cfg.schedule.sT * cfg.schedule.sT;
  return {best < bound, "best chain per-channel MSE " + fmt(best) + " (< " + fmt(bound) + ")"};
}

Outcome shift_concat_equivalence() {
  Rng rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index in = 2 + trial % 5, k = 1 + trial % 6, hidden = 3 + trial % 7, out = 1 + trial % 3;
    Mlp base;
    std::vector<Matrix> shifts;
    Index prev = in;
    for (Index rows : {hidden, hidden, out}) {
      base.weights.push_back(Matrix::NullaryExpr(rows, prev, [&] { return rng.normal(); }));
      base.biases.push_back(rng.normal_vector(rows));
      shifts.push_back(Matrix::NullaryExpr(rows, k, [&] { return rng.normal(); }));
      prev = rows;
    }
    const Vector z = rng.normal_vector(k), x = rng.normal_vector(in);
    const Vector a = modulated_forward_shift(z, base, shifts, x);
    const Vector b = modulated_forward_concat(z, augment_with_shifts(base, shifts), x);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, "max deviation over 100 instances " + fmt(worst, 3) + " (< 1e-12)"};
}

Outcome schedule_exactness() {
  const AnnealingSchedule sched;  // s0 5, sT 0.1, T 100
  const double first = schedule_noise(sched, 0), last = schedule_noise(sched, sched.steps);
  double worst = 0.0;
  const double slope = (std::log(sched.sT) - std::log(sched.s0)) / sched.steps;
  for (int t = 0; t <= sched.steps; ++t) {
    worst = std::max(worst, std::abs(std::log(schedule_noise(sched, t)) - (std::log(sched.s0) + slope * t)));
  }
  const FunctionTarget target(3, [](const Vector& x, Vector& g) {
    g = -x;
    return -0.5 * x.squaredNorm();
  });
  HmcConfig cfg;  // 8 chains, keep_last 16, T 100, 100 leapfrog steps
  cfg.schedule.base_step = 0.1;
  cfg.seed = 1;
  const ChainSet set = run_chains(target, cfg);
  long min_grad = std::numeric_limits<long>::max(), max_grad = 0;
  for (const ChainResult& c : set.chains) {
    min_grad = std::min(min_grad, c.gradient_evaluations);
    max_grad = std::max(max_grad, c.gradient_evaluations);
  }
  const bool pass = first == 5.0 && last == 0.1 && worst < 1e-12 && set.sample_count() == 128 && min_grad == 10000 &&
                    max_grad == 10000;
  return {pass, "s_0 " + fmt(first, 17) + ", s_T " + fmt(last, 17) + ", log-linearity error " + fmt(worst, 3) +
                    "; samples " + std::to_string(set.sample_count()) + " (128); gradient evaluations per chain " +
                    std::to_string(min_grad) + ".." + std::to_string(max_grad) + " (10000)"};
}

struct Criterion {
  int number;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cache_dir = "acceptance_cache";
  std::vector<int> only;
  app.add_option("--cache-dir", cache_dir, "Directory for trained model checkpoints");
  app.add_option("--only", only, "Run only these criterion numbers")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  ModelCache cache(cache_dir);
  const std::vector<Criterion> criteria{
      {1, "architecture fidelity", 1.0, architecture_fidelity},
      {2, "renderer exactness", 10.0, renderer_exactness},
      {3, "differentiability", 60.0, differentiability},
      {4, "sampler correctness", 60.0, sampler_correctness},
      {5, "renderer ablation", 15 * 60.0, [&] { return renderer_ablation(cache); }},
      {6, "annealing ablation", 20 * 60.0, [&] { return annealing_ablation(cache); }},
      {7, "diversity ordering", 30 * 60.0, [&] { return diversity_ordering(cache); }},
      {8, "latent-only ablation", 20 * 60.0, [&] { return latent_only_ablation(cache); }},
      {9, "posterior self-consistency", 5 * 60.0, [&] { return posterior_self_consistency(cache); }},
      {10, "shift/concatenation equivalence", 1.0, shift_concat_equivalence},
      {11, "schedule exactness", 1.0, schedule_exactness},
  };

  // Training happens up front; criteria 7 and 8 add their model's training time.
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };
  if (wanted(5) || wanted(6) || wanted(7) || wanted(9)) cache.get("desk", desk_train_config(), training_data_spec());
  if (wanted(8)) cache.get("reduced-hypernet", reduced_train_config(), training_data_spec());

  int failures = 0;
  std::vector<std::string> lines;
  for (const Criterion& c : criteria) {
    if (!wanted(c.number)) continue;
    std::cout << "criterion " << c.number << ": " << c.name << std::endl;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = seconds_since(start) + o.extra_seconds;
    const bool in_time = seconds < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << " criterion " << std::setw(2) << c.number << " " << c.name << ": " << o.detail
         << "; runtime " << fmt(seconds, 4) << " s (limit " << fmt(c.limit_seconds, 4) << " s"
         << (in_time ? "" : ", exceeded") << ")";
    std::cout << line.str() << std::endl;
    lines.push_back(line.str());
  }
  std::cout << "\nsummary\n";
  for (const std::string& l : lines) std::cout << l << "\n";
  return failures == 0 ? 0 : 1;
}
