#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "probnerf/ablation.hpp"
#include "probnerf/archive.hpp"
#include "probnerf/errors.hpp"
#include "probnerf/evaluation.hpp"
#include "probnerf/metrics.hpp"

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
  c.encoder.channels = {2, 2, 2, 2, 2};
  c.encoder.camera_hidden = 4;
  return c;
}

Image random_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img = Image::filled(w, h, Eigen::Vector3d::Zero());
  for (Index i = 0; i < img.pixels.size(); ++i) img.pixels.data()[i] = rng.uniform();
  return img;
}

std::string first_line(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(Psnr, Examples) {
  const Image a = random_image(5, 4, 1);
  EXPECT_TRUE(is_infinite_psnr(psnr(a, a)));
  const Image zero = Image::filled(5, 4, Eigen::Vector3d::Zero());
  const Image one = Image::filled(5, 4, Eigen::Vector3d::Ones());
  EXPECT_DOUBLE_EQ(psnr(zero, one), 0.0);
  const Image tenth = Image::filled(5, 4, Eigen::Vector3d::Constant(0.1));
  EXPECT_NEAR(mse(zero, tenth), 0.01, 1e-15);
  EXPECT_NEAR(psnr(zero, tenth), 20.0, 1e-12);
  const Image b = random_image(5, 4, 2);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_FALSE(is_infinite_psnr(psnr(a, b)));
  EXPECT_THROW(psnr(a, random_image(4, 5, 3)), ShapeError);
}

TEST(Variance, Examples) {
  const Image zero = Image::filled(3, 2, Eigen::Vector3d::Zero());
  const Image one = Image::filled(3, 2, Eigen::Vector3d::Ones());
  const VarianceMap v = per_pixel_variance({zero, one});
  EXPECT_EQ(v.width, 3);
  EXPECT_EQ(v.height, 2);
  for (Index i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(v.values[i], 0.5);
  EXPECT_DOUBLE_EQ(v.mean, 0.5);
  const VarianceMap same = per_pixel_variance({one, one, one});
  EXPECT_EQ(same.mean, 0.0);
  EXPECT_THROW(per_pixel_variance({one}), std::invalid_argument);
  EXPECT_THROW(per_pixel_variance({one, random_image(2, 3, 1)}), ShapeError);
}

TEST(Variance, OrderInvariantAndMatchesOracle) {
  std::vector<Image> s{random_image(4, 4, 1), random_image(4, 4, 2), random_image(4, 4, 3), random_image(4, 4, 4)};
  const VarianceMap a = per_pixel_variance(s);
  std::swap(s[0], s[3]);
  std::swap(s[1], s[2]);
  const VarianceMap b = per_pixel_variance(s);
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-15);
  double oracle = 0.0;
  for (int c = 0; c < 3; ++c) {
    double m = 0.0;
    for (const Image& img : s) m += img.pixels(c, 5) / 4;
    for (const Image& img : s) oracle += (img.pixels(c, 5) - m) * (img.pixels(c, 5) - m) / 3;
  }
  EXPECT_NEAR(a.values[5], oracle / 3, 1e-15);
}

TEST(Stats, SweepMedianDeviation) {
  const auto sweep = log_sweep(1e-5, 1e-1, 9);
  ASSERT_EQ(sweep.size(), 9u);
  EXPECT_DOUBLE_EQ(sweep.front(), 1e-5);
  EXPECT_DOUBLE_EQ(sweep.back(), 1e-1);
  for (std::size_t i = 1; i < 9; ++i) EXPECT_NEAR(std::log10(sweep[i] / sweep[i - 1]), 0.5, 1e-12);
  EXPECT_EQ(log_sweep(0.3, 0.3, 1), std::vector<double>{0.3});
  EXPECT_THROW(log_sweep(0.0, 1.0, 3), std::invalid_argument);
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
  EXPECT_NEAR(standard_deviation({1.0, 2.0, 3.0, 4.0}), std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(RendererAblation, TinyStepFoamAcceptsAndTableIsComplete) {
  const ProbNerfModel model = ProbNerfModel::initialize(tiny_config(), 1);
  RendererAblationConfig cfg;
  cfg.step_sizes = {1e-8, 1e-2};
  cfg.n_chains = 3;
  cfg.n_leapfrog = 4;
  cfg.iterations = 5;
  cfg.rig.width = cfg.rig.height = 4;
  cfg.quadrature_samples = 4;
  cfg.seed = 3;
  const auto rows = ablate_renderer(model, cfg);
  ASSERT_EQ(rows.size(), 4u);
  int foam = 0;
  for (const AcceptanceRow& r : rows) {
    EXPECT_GE(r.acceptance, 0.0);
    EXPECT_LE(r.acceptance, 1.0);
    if (r.renderer == "foam") {
      ++foam;
      if (r.step_size == 1e-8) EXPECT_GT(r.acceptance, 0.95);
    }
  }
  EXPECT_EQ(foam, 2);
  EXPECT_EQ(ablate_renderer(model, cfg)[3].acceptance, rows[3].acceptance);
  const auto dir = std::filesystem::temp_directory_path() / "probnerf_test_ablation";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_acceptance_csv(dir / "acceptance.csv", rows);
  EXPECT_EQ(first_line(dir / "acceptance.csv"), "renderer,step_size,acceptance");
  std::filesystem::remove_all(dir);
}

TEST(AnnealingAblation, MatchedChainsReportPerChainError) {
  const ModelConfig mc = tiny_config();
  const ProbNerfModel model = ProbNerfModel::initialize(mc, 2);
  const Camera cam = Camera::look_at({0, 0, 3}, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), 0.8, 3, 3);
  const Observation obs{generate_rays(cam), Eigen::Matrix3Xd::Constant(3, 9, 0.4)};
  AnnealingAblationConfig cfg;
  cfg.hmc.schedule = {5.0, 0.1, 6, 0.01};
  cfg.hmc.n_chains = 4;
  cfg.hmc.n_leapfrog = 3;
  cfg.hmc.keep_last = 1;
  cfg.fixed_step = 0.002;
  const AnnealingAblationReport r = ablate_annealing(model, obs, cfg);
  ASSERT_EQ(r.annealed_mse.size(), 4u);
  ASSERT_EQ(r.fixed_mse.size(), 4u);
  EXPECT_NEAR(r.annealed_spread, standard_deviation(r.annealed_mse), 1e-15);
  EXPECT_NEAR(r.fixed_spread, standard_deviation(r.fixed_mse), 1e-15);
  EXPECT_EQ(schedule_noise(cfg.hmc.schedule, cfg.hmc.schedule.steps), cfg.hmc.schedule.sT);
  const AnnealingAblationReport again = ablate_annealing(model, obs, cfg);
  EXPECT_EQ(again.annealed_mse, r.annealed_mse);
  EXPECT_EQ(again.fixed_mse, r.fixed_mse);
}

TEST(ObservationMse, PriorDrawReproducesItsOwnRender) {
  const ProbNerfModel model = ProbNerfModel::initialize(tiny_config(), 3);
  const auto [state, weights] = sample_prior(model, 4);
  const Camera cam = Camera::look_at({0.2, 0.1, 3}, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), 0.8, 4, 4);
  const std::vector<Ray> rays = generate_rays(cam);
  const Observation obs{rays, render_rays(weights, rays, model.scene())};
  EXPECT_LT(observation_mse(model, state.flat(), false, obs), 1e-24);
  EXPECT_GT(observation_mse(model, Vector::Zero(model.state_dim()), false, obs), 0.0);
}

TEST(Evaluation, ReportsPerViewMetrics) {
  const ProbNerfModel model = ProbNerfModel::initialize(tiny_config(), 5);
  SampleArchive archive;
  archive.method = "prior";
  archive.latent_dim = model.latent_dim();
  archive.weight_dim = model.weight_dim();
  for (std::uint64_t s = 0; s < 3; ++s) archive.states.push_back(sample_prior(model, s).first.flat());
  const Camera cam = Camera::look_at({0, 0.5, 3}, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), 0.8, 5, 5);
  const std::vector<Image> renders = render_states(model, archive.states, false, cam);
  ASSERT_EQ(renders.size(), 3u);
  const std::vector<View> views{{renders[0], cam, 0.0}, {random_image(5, 5, 9), cam, 0.0}};
  const EvalReport report = evaluate_samples(model, archive, views);
  ASSERT_EQ(report.views.size(), 2u);
  EXPECT_TRUE(report.views[0].infinite);
  EXPECT_FALSE(report.views[1].infinite);
  EXPECT_NEAR(report.views[1].mean_variance, per_pixel_variance(renders).mean, 1e-15);
  const nlohmann::json j = nlohmann::json::parse(eval_report_to_json(report));
  EXPECT_EQ(j["views"].size(), 2u);
  archive.weight_dim = 0;
  EXPECT_THROW(evaluate_samples(model, archive, views), ShapeError);
}
