#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "probnerf/checkpoint.hpp"
#include "probnerf/errors.hpp"
#include "probnerf/train.hpp"
#include "probnerf/vae.hpp"

using namespace probnerf;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.field = {2, 6, 2, 4};
  c.scene.grid_size = 4;
  c.latent_dim = 4;
  c.flow_hidden = 8;
  c.hypernet_hidden = 8;
  c.encoder.image_size = 8;
  c.encoder.channels = {2, 3, 3, 3, 3};
  c.encoder.camera_hidden = 4;
  return c;
}

DatasetSpec tiny_dataset_spec(int objects, int views) {
  DatasetSpec s;
  s.n_objects = objects;
  s.views_per_object = views;
  s.image_size = 8;
  s.seed = 3;
  s.scene.grid_size = 4;
  return s;
}

Camera test_camera() {
  return Camera::look_at({0.5, 0.2, 3}, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), 1.0, 8, 8);
}

Image test_image(std::uint64_t seed) {
  Rng rng(seed);
  Image img = Image::filled(8, 8, Eigen::Vector3d::Zero());
  for (Index i = 0; i < img.pixels.size(); ++i) img.pixels.data()[i] = rng.uniform();
  return img;
}

}  // namespace

TEST(Encoder, ZeroParametersGiveUnitPotential) {
  const Encoder enc(tiny_config().encoder, 4);
  const GaussianPotential p = encode_view(enc, Vector::Zero(enc.parameter_count()), test_image(1), test_camera());
  EXPECT_EQ(p.mu, Vector::Zero(4));
  EXPECT_EQ(p.tau, Vector::Ones(4));
}

TEST(Encoder, DeterministicAndShapeChecked) {
  const Encoder enc(tiny_config().encoder, 4);
  Rng rng(2);
  const Vector phi = enc.initialize(rng);
  const GaussianPotential a = encode_view(enc, phi, test_image(1), test_camera());
  const GaussianPotential b = encode_view(enc, phi, test_image(1), test_camera());
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.tau, b.tau);
  EXPECT_TRUE((a.tau.array() > 0).all());
  EXPECT_THROW(encode_view(enc, phi, Image::filled(4, 4, Eigen::Vector3d::Zero()), test_camera()), ShapeError);
}

TEST(Encoder, GradientWrtParameters) {
  const Encoder enc(tiny_config().encoder, 4);
  Rng rng(3);
  const Vector phi = enc.initialize(rng) + 0.05 * rng.normal_vector(enc.parameter_count());
  const Image img = test_image(4);
  const Camera cam = test_camera();
  const Matrix mix = rng.normal_vector(4);
  ad::ScalarFn f = [&](ad::Tape&, const ad::Var& p) {
    const PotentialVars pot = enc.encode(p, img, cam);
    return ad::sum(ad::mul_const(pot.mu, mix)) + ad::sum(ad::log(pot.tau));
  };
  std::vector<Index> coords;
  for (Index i = 0; i < enc.parameter_count(); i += 11) coords.push_back(i);
  for (Index i = enc.parameter_count() - 12; i < enc.parameter_count(); ++i) coords.push_back(i);
  EXPECT_LT(ad::check_gradient(f, phi, 1e-5, coords).max_relative_error, 1e-4);
}

TEST(Pooling, SingleViewExample) {
  const GaussianPotential prior{Vector::Constant(1, 2.0), Vector::Ones(1)};
  const std::vector<GaussianPotential> views{{Vector::Zero(1), Vector::Ones(1)}};
  const GaussianPotential q = pool_potentials(prior, views);
  EXPECT_DOUBLE_EQ(q.tau[0], 2.0);
  EXPECT_DOUBLE_EQ(q.mu[0], 1.0);
}

TEST(Pooling, NoViewsReturnsPrior) {
  Rng rng(1);
  const GaussianPotential prior{rng.normal_vector(5), Vector::Constant(5, 0.7)};
  const GaussianPotential q = pool_potentials(prior, {});
  EXPECT_LT((q.mu - prior.mu).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(q.tau, prior.tau);
}

TEST(Pooling, OrderInvariant) {
  Rng rng(2);
  const GaussianPotential prior{rng.normal_vector(6), Vector::Ones(6)};
  std::vector<GaussianPotential> views;
  for (int j = 0; j < 5; ++j) {
    views.push_back({rng.normal_vector(6), rng.normal_vector(6).array().exp().matrix()});
  }
  const GaussianPotential a = pool_potentials(prior, views);
  std::reverse(views.begin(), views.end());
  std::swap(views[0], views[2]);
  const GaussianPotential b = pool_potentials(prior, views);
  EXPECT_LT((a.mu - b.mu).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.tau - b.tau).cwiseAbs().maxCoeff(), 1e-12);
  views.push_back({Vector::Zero(5), Vector::Ones(5)});
  EXPECT_THROW(pool_potentials(prior, views), ShapeError);
}

TEST(Batch, ShapesAndValidIndices) {
  const Dataset data = generate_dataset(tiny_dataset_spec(3, 4));
  const ModelConfig cfg = tiny_config();
  const TrainBatch batch = make_train_batch(data, BatchSpec{5, 3, 50}, cfg.scene, 2, 9);
  ASSERT_EQ(batch.objects.size(), 5u);
  for (const TrainObject& o : batch.objects) {
    EXPECT_EQ(o.images.size(), 3u);
    EXPECT_EQ(o.total_rays, 3 * 64);
    EXPECT_EQ(o.rays.pixels.cols(), 50);
    EXPECT_EQ(o.rays.batch.ray_count(), 50);
    EXPECT_TRUE((o.rays.pixels.array() >= 0).all() && (o.rays.pixels.array() <= 1).all());
  }
  // Views are drawn without replacement.
  const TrainBatch all = make_train_batch(data, BatchSpec{2, 10, 10}, cfg.scene, 2, 1);
  EXPECT_EQ(all.objects[0].images.size(), 4u);
  const auto& cams = all.objects[0].cameras;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    for (std::size_t j = i + 1; j < cams.size(); ++j) {
      EXPECT_NE(cams[i].camera_to_world(), cams[j].camera_to_world());
    }
  }
}

TEST(Elbo, ZeroLikelihoodWeightMatchedPriorIsZero) {
  // No views pool to the prior potential N(0, I), which equals the prior
  // pushed through an identity-initialized flow.
  const ModelConfig cfg = tiny_config();
  const ProbNerfModel model = ProbNerfModel::initialize(cfg, 1);
  TrainBatch batch;
  TrainObject obj;
  Observation obs{generate_rays(test_camera()), Eigen::Matrix3Xd::Constant(3, 64, 0.5)};
  obj.rays = prepare_observation(obs, cfg.scene, cfg.field.encoding_order);
  obj.total_rays = 64;
  batch.objects.push_back(obj);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EXPECT_NEAR(elbo_estimate(model, batch, ElboOptions{0.1, 0.0}, seed), 0.0, 1e-12);
  }
}

TEST(Elbo, ZeroLikelihoodWeightIsNegativeKl) {
  const ModelConfig cfg = tiny_config();
  ProbNerfModel model = ProbNerfModel::initialize(cfg, 2);
  Rng rng(5);
  ModelParams p = model.params();
  p.flow += 0.1 * rng.normal_vector(p.flow.size());
  p.encoder += 0.1 * rng.normal_vector(p.encoder.size());
  model.set_params(p);
  const Dataset data = generate_dataset(tiny_dataset_spec(2, 3));
  const TrainBatch batch = make_train_batch(data, BatchSpec{2, 3, 16}, cfg.scene, 2, 4);
  double mean = 0.0;
  const int n = 400;
  for (int i = 0; i < n; ++i) mean += elbo_estimate(model, batch, ElboOptions{0.1, 0.0}, static_cast<std::uint64_t>(i));
  EXPECT_LT(mean / n, 0.0);
}

TEST(Elbo, DeterministicPerSeed) {
  const ModelConfig cfg = tiny_config();
  const ProbNerfModel model = ProbNerfModel::initialize(cfg, 3);
  const Dataset data = generate_dataset(tiny_dataset_spec(2, 3));
  const TrainBatch batch = make_train_batch(data, BatchSpec{2, 3, 16}, cfg.scene, 2, 4);
  EXPECT_EQ(elbo_estimate(model, batch, {}, 7), elbo_estimate(model, batch, {}, 7));
  EXPECT_NE(elbo_estimate(model, batch, {}, 7), elbo_estimate(model, batch, {}, 8));
}

TEST(Elbo, RaySubsampleIsUnbiased) {
  const ModelConfig cfg = tiny_config();
  const ProbNerfModel model = ProbNerfModel::initialize(cfg, 4);
  const Dataset data = generate_dataset(tiny_dataset_spec(1, 2));
  const std::uint64_t noise_seed = 11;
  const TrainBatch full = make_train_batch(data, BatchSpec{1, 2, 128}, cfg.scene, 2, 0);
  ASSERT_EQ(full.objects[0].rays.pixels.cols(), 128);
  const double reference = elbo_estimate(model, full, {}, noise_seed);
  const int n = 200;
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    const TrainBatch sub = make_train_batch(data, BatchSpec{1, 2, 16}, cfg.scene, 2, static_cast<std::uint64_t>(i + 1));
    values.push_back(elbo_estimate(model, sub, {}, noise_seed));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  EXPECT_LT(std::abs(mean - reference), 2.0 * se) << "mean " << mean << " full " << reference << " se " << se;
}

TEST(Elbo, GradientCheck) {
  const ModelConfig cfg = tiny_config();
  ProbNerfModel model = ProbNerfModel::initialize(cfg, 5);
  Rng rng(6);
  ModelParams p = model.params();
  p.flow += 0.1 * rng.normal_vector(p.flow.size());
  p.prior_potential = 0.2 * rng.normal_vector(p.prior_potential.size());
  model.set_params(p);
  const Dataset data = generate_dataset(tiny_dataset_spec(2, 2));
  const TrainBatch batch = make_train_batch(data, BatchSpec{2, 2, 12}, cfg.scene, 2, 3);
  ad::ScalarFn f = [&](ad::Tape&, const ad::Var& x) { return elbo_estimate(model, x, batch, {}, 9); };
  const Vector x = pack_params(model.params());
  std::vector<Index> coords;
  for (Index i = 0; i < x.size(); i += 37) coords.push_back(i);
  for (Index i = x.size() - 2 * cfg.latent_dim; i < x.size(); ++i) coords.push_back(i);
  const auto report = ad::check_gradient(f, x, 1e-5, coords);
  EXPECT_LT(report.max_relative_error, 1e-3) << "coordinate " << report.argmax;
}

TEST(Elbo, ReparameterizedCodeMovesWithPriorLocation) {
  // With no views the code is z = mu_0 + exp(log_scale_0) eps, so dz/dmu_0 = I.
  // Under zero likelihood weight and identity flow the ELBO is
  // log N(z; 0, I) - log N(z; mu_0, sigma_0^2), with gradient -z in mu_0.
  const ModelConfig cfg = tiny_config();
  ProbNerfModel model = ProbNerfModel::initialize(cfg, 6);
  ModelParams p = model.params();
  Rng rng(8);
  p.prior_potential << rng.normal_vector(4), 0.3 * rng.normal_vector(4);
  model.set_params(p);
  TrainBatch batch;
  TrainObject obj;
  Observation obs{generate_rays(test_camera()), Eigen::Matrix3Xd::Constant(3, 64, 0.5)};
  obj.rays = prepare_observation(obs, cfg.scene, cfg.field.encoding_order);
  obj.total_rays = 64;
  batch.objects.push_back(obj);
  ad::Tape tape;
  const Vector x = pack_params(model.params());
  ad::Var params = tape.variable(x);
  tape.backward(elbo_estimate(model, params, batch, ElboOptions{0.1, 0.0}, 3));
  const Vector g = tape.gradient(params);
  Rng eps_rng(derive_seed(3, 0));
  const Vector eps = eps_rng.normal_vector(4);
  const Vector z = p.prior_potential.head(4) + (p.prior_potential.tail(4).array().exp() * eps.array()).matrix();
  const Index mu_at = x.size() - 8;
  EXPECT_LT((g.segment(mu_at, 4) + z).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Adam, ZeroLearningRateLeavesParameters) {
  Vector x = Vector::LinSpaced(5, -1, 1);
  const Vector start = x;
  Adam adam(5, Adam::Options{0.0});
  for (int i = 0; i < 10; ++i) adam.ascend(x, Vector::Ones(5));
  EXPECT_EQ(x, start);
}

TEST(Adam, MinimizesQuadratic) {
  Vector x = Vector::Constant(3, 4.0);
  Adam adam(3, Adam::Options{0.05});
  for (int i = 0; i < 2000; ++i) adam.descend(x, 2.0 * x);
  EXPECT_LT(x.norm(), 1e-2);
}

TEST(Train, ZeroLearningRateKeepsModel) {
  const Dataset data = generate_dataset(tiny_dataset_spec(2, 2));
  TrainConfig tc;
  tc.iterations = 3;
  tc.adam.learning_rate = 0.0;
  tc.batch = {1, 2, 8};
  tc.model = tiny_config();
  const ProbNerfModel initial = ProbNerfModel::initialize(tc.model, 1);
  const TrainResult r = train(tc, data, initial);
  EXPECT_EQ(pack_params(r.model.params()), pack_params(initial.params()));
}

TEST(Train, ElboImprovesAndLogsRows) {
  const Dataset data = generate_dataset(tiny_dataset_spec(2, 3));
  TrainConfig tc;
  tc.iterations = 300;
  tc.adam.learning_rate = 3e-3;
  tc.batch = {2, 3, 64};
  tc.log_every = 1;
  tc.seed = 2;
  tc.model = tiny_config();
  const TrainResult r = train(tc, data, ProbNerfModel::initialize(tc.model, 1));
  ASSERT_EQ(r.log.size(), 300u);
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 50; ++i) {
    early += r.log[static_cast<std::size_t>(i)].elbo;
    late += r.log[r.log.size() - 1 - static_cast<std::size_t>(i)].elbo;
  }
  EXPECT_GT(late, early);
  for (std::size_t i = 1; i < r.log.size(); ++i) EXPECT_GE(r.log[i].wall_time_s, r.log[i - 1].wall_time_s);
}

TEST(Train, NonFiniteParametersAbortWithDiagnostics) {
  const Dataset data = generate_dataset(tiny_dataset_spec(1, 2));
  TrainConfig tc;
  tc.iterations = 2;
  tc.batch = {1, 2, 8};
  tc.model = tiny_config();
  ProbNerfModel model = ProbNerfModel::initialize(tc.model, 1);
  ModelParams p = model.params();
  p.hypernet[0] = std::numeric_limits<double>::quiet_NaN();
  model.set_params(p);
  try {
    train(tc, data, model);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.iteration(), 1);
    EXPECT_FALSE(e.term().empty());
  }
}

TEST(Checkpoint, RoundTripThroughFloat) {
  const ModelConfig cfg = tiny_config();
  ProbNerfModel model = ProbNerfModel::initialize(cfg, 7);
  ModelParams p = model.params();
  Rng rng(1);
  p.prior_potential = rng.normal_vector(8);
  model.set_params(p);
  const ProbNerfModel back = decode_checkpoint(encode_checkpoint(model));
  const ModelParams expect = round_to_float(model.params());
  EXPECT_EQ(back.params().flow, expect.flow);
  EXPECT_EQ(back.params().hypernet, expect.hypernet);
  EXPECT_EQ(back.params().encoder, expect.encoder);
  EXPECT_EQ(back.params().prior_potential, expect.prior_potential);
  EXPECT_EQ(back.config().latent_dim, cfg.latent_dim);
  EXPECT_EQ(back.config().encoder, cfg.encoder);
  EXPECT_EQ(back.config().field.grid_size, 4);
  EXPECT_LT((back.params().hypernet - model.params().hypernet).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const ProbNerfModel model = ProbNerfModel::initialize(tiny_config(), 7);
  std::string bytes = encode_checkpoint(model);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  EXPECT_THROW(decode_checkpoint(""), FormatError);
}

TEST(Config, ModelConfigJsonRoundTrip) {
  ModelConfig c = ModelConfig::paper();
  c.weight_variance = 0.01;
  c.permutation_seed = 99;
  const ModelConfig back = model_config_from_json(model_config_to_json(c));
  EXPECT_EQ(back.field.grid_size, 128);
  EXPECT_EQ(back.latent_dim, 128);
  EXPECT_EQ(back.hypernet_hidden, 512);
  EXPECT_EQ(back.weight_variance, 0.01);
  EXPECT_EQ(back.permutation_seed, 99u);
  EXPECT_THROW(model_config_from_json("{not json"), FormatError);
}

TEST(Config, TrainConfigJsonAndShortcuts) {
  TrainConfig c;
  c.dataset = "data/x";
  c.iterations = 17;
  c.adam.learning_rate = 0.002;
  c.seed = 5;
  const TrainConfig back = train_config_from_json(train_config_to_json(c));
  EXPECT_EQ(back.dataset, "data/x");
  EXPECT_EQ(back.iterations, 17);
  EXPECT_EQ(back.adam.learning_rate, 0.002);
  EXPECT_EQ(back.seed, 5u);
  const TrainConfig s = train_config_from_json(R"({"latent_dim": 8, "grid_size": 12, "image_size": 16})");
  EXPECT_EQ(s.model.latent_dim, 8);
  EXPECT_EQ(s.model.field.grid_size, 12);
  EXPECT_EQ(s.model.scene.grid_size, 12);
  EXPECT_EQ(s.model.encoder.image_size, 16);
}
