#include <benchmark/benchmark.h>

#include "probnerf/dataset.hpp"
#include "probnerf/hmc.hpp"
#include "probnerf/render.hpp"
#include "probnerf/rng.hpp"
#include "probnerf/vae.hpp"

using namespace probnerf;

namespace {

Camera bench_camera(int size) {
  return camera_at_azimuth(0.6, CameraRig{3.0, 1.0471975511965976, size, size});
}

void BM_FoamRenderImage(benchmark::State& state) {
  const FieldConfig cfg = FieldConfig::desk();
  Rng rng(1);
  const FieldWeights w = FieldWeights::random(cfg, rng);
  const FoamScene scene{cfg.grid_size};
  const Camera cam = bench_camera(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_image(w, cam, scene));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_FoamRenderImage)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_QuadratureRenderImage(benchmark::State& state) {
  const FieldConfig cfg = FieldConfig::desk();
  Rng rng(1);
  const FieldWeights w = FieldWeights::random(cfg, rng);
  const FoamScene scene{cfg.grid_size};
  const Camera cam = bench_camera(16);
  const RendererChoice choice{RendererKind::kQuadrature, static_cast<int>(state.range(0)), 3};
  for (auto _ : state) benchmark::DoNotOptimize(render_image(w, cam, scene, choice));
}
BENCHMARK(BM_QuadratureRenderImage)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PosteriorGradient(benchmark::State& state) {
  const ProbNerfModel model = ProbNerfModel::initialize(ModelConfig::desk(), 2);
  const int size = static_cast<int>(state.range(0));
  const Camera cam = bench_camera(size);
  Rng rng(4);
  const Image img = render_image(FieldWeights::random(model.config().field, rng), cam, model.scene());
  const bool latent_only = state.range(1) != 0;
  const FoamTarget target(model, full_view(img, cam), latent_only);
  const Vector x = 0.5 * rng.normal_vector(target.dim());
  for (auto _ : state) benchmark::DoNotOptimize(target.evaluate(x, 0));
}
BENCHMARK(BM_PosteriorGradient)->Args({16, 0})->Args({16, 1})->Args({32, 0})->Unit(benchmark::kMillisecond);

void BM_ElboGradient(benchmark::State& state) {
  const ModelConfig cfg = ModelConfig::desk();
  const ProbNerfModel model = ProbNerfModel::initialize(cfg, 3);
  DatasetSpec spec;
  spec.n_objects = 4;
  spec.views_per_object = 5;
  spec.seed = 9;
  const Dataset data = generate_dataset(spec);
  const TrainBatch batch = make_train_batch(data, BatchSpec{4, 5, 256}, cfg.scene, cfg.field.encoding_order, 1);
  const Vector params = pack_params(model.params());
  ad::ScalarFn f = [&](ad::Tape&, const ad::Var& p) { return elbo_estimate(model, p, batch, {}, 5); };
  for (auto _ : state) benchmark::DoNotOptimize(ad::value_and_gradient(f, params));
}
BENCHMARK(BM_ElboGradient)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
