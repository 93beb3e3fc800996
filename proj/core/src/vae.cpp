#include "probnerf/vae.hpp"

#include <algorithm>
#include <numeric>

#include "probnerf/ops.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

TrainBatch make_train_batch(const Dataset& dataset, const BatchSpec& spec, const FoamScene& scene,
                            int encoding_order, std::uint64_t seed) {
  if (dataset.entries.empty()) throw std::invalid_argument("make_train_batch: empty dataset");
  if (spec.objects < 1 || spec.views_per_object < 1 || spec.rays_per_object < 1) {
    throw std::invalid_argument("make_train_batch: batch sizes must be positive");
  }
  Rng rng(seed);
  TrainBatch batch;
  for (int b = 0; b < spec.objects; ++b) {
    const DatasetEntry& e =
        dataset.entries[static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(dataset.entries.size())))];
    std::vector<std::size_t> order(e.views.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    order.resize(std::min(order.size(), static_cast<std::size_t>(spec.views_per_object)));

    TrainObject obj;
    std::vector<std::pair<std::size_t, Index>> pixels;
    for (std::size_t v : order) {
      const View& view = e.views[v];
      obj.images.push_back(view.image);
      obj.cameras.push_back(view.camera);
      for (Index p = 0; p < view.image.pixels.cols(); ++p) pixels.emplace_back(v, p);
    }
    obj.total_rays = static_cast<Index>(pixels.size());
    const std::size_t n = std::min(pixels.size(), static_cast<std::size_t>(spec.rays_per_object));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(pixels.size() - i)));
      std::swap(pixels[i], pixels[j]);
    }
    Observation sub;
    sub.pixels.resize(3, static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const View& view = e.views[pixels[i].first];
      const Index p = pixels[i].second;
      sub.rays.push_back(view.camera.pixel_ray(static_cast<int>(p / view.image.width),
                                               static_cast<int>(p % view.image.width)));
      sub.pixels.col(static_cast<Index>(i)) = view.image.pixels.col(p);
    }
    obj.rays = prepare_observation(sub, scene, encoding_order);
    batch.objects.push_back(std::move(obj));
  }
  return batch;
}

Vector pack_params(const ModelParams& p) {
  Vector flat(p.flow.size() + p.hypernet.size() + p.encoder.size() + p.prior_potential.size());
  flat << p.flow, p.hypernet, p.encoder, p.prior_potential;
  return flat;
}

ModelParams unpack_params(const ProbNerfModel& model, const Vector& flat) {
  const ModelParams& ref = model.params();
  if (flat.size() != pack_params(ref).size()) throw ShapeError("unpack_params: wrong length");
  ModelParams p;
  Index at = 0;
  auto take = [&](Index n) {
    Vector v = flat.segment(at, n);
    at += n;
    return v;
  };
  p.flow = take(ref.flow.size());
  p.hypernet = take(ref.hypernet.size());
  p.encoder = take(ref.encoder.size());
  p.prior_potential = take(ref.prior_potential.size());
  return p;
}

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;
}

ad::Var elbo_estimate(const ProbNerfModel& model, const ad::Var& params, const TrainBatch& batch,
                      const ElboOptions& options, std::uint64_t seed) {
  if (batch.objects.empty()) throw std::invalid_argument("elbo_estimate: empty batch");
  if (!(options.observation_scale > 0.0)) throw std::invalid_argument("elbo_estimate: s must be positive");
  const ModelParams& ref = model.params();
  const Index k = model.latent_dim();
  Index at = 0;
  auto take = [&](Index n) {
    ad::Var v = ad::slice_rows(params, at, n);
    at += n;
    return v;
  };
  const ad::Var flow = take(ref.flow.size());
  const ad::Var hyper = take(ref.hypernet.size());
  const ad::Var enc = take(ref.encoder.size());
  const ad::Var prior = take(ref.prior_potential.size());
  if (at != params.rows()) throw ShapeError("elbo_estimate: packed parameter length mismatch");

  const PotentialVars prior_pot = prior_potential(prior, k);
  ad::Var total;
  for (std::size_t b = 0; b < batch.objects.size(); ++b) {
    const TrainObject& obj = batch.objects[b];
    std::vector<PotentialVars> views;
    for (std::size_t v = 0; v < obj.images.size(); ++v) {
      views.push_back(model.encoder().encode(enc, obj.images[v], obj.cameras[v]));
    }
    const PotentialVars q = pool_potentials(prior_pot, views);
    Rng rng(derive_seed(seed, b));
    const Matrix eps = rng.normal_vector(k);
    const ad::Var log_tau = ad::log(q.tau);
    const ad::Var z = q.mu + ad::mul_const(ad::exp(-0.5 * log_tau), eps);
    const ad::Var resid = z - q.mu;
    const ad::Var log_q = ad::affine_scalar(ad::sum(log_tau) - ad::sum(q.tau * ad::square(resid)), 0.5,
                                            -static_cast<double>(k) * kHalfLog2Pi);
    const auto inv = model.flow().inverse(flow, z);
    const ad::Var log_p = standard_normal_log_density(inv.value) + inv.log_det;

    const ad::Var w = model.hypernet().forward(hyper, z);
    const Index n = obj.rays.pixels.cols();
    const ad::Var sse = squared_error(w, model.config().field, obj.rays.batch, obj.rays.pixels);
    const double scale = options.likelihood_weight * static_cast<double>(obj.total_rays) / static_cast<double>(n);
    const ad::Var lik = scale * gaussian_log_likelihood(sse, 3 * n, options.observation_scale);
    const ad::Var term = lik + log_p - log_q;
    total = b == 0 ? term : total + term;
  }
  return (1.0 / static_cast<double>(batch.objects.size())) * total;
}

double elbo_estimate(const ProbNerfModel& model, const TrainBatch& batch, const ElboOptions& options,
                     std::uint64_t seed) {
  ad::Tape tape;
  return elbo_estimate(model, tape.constant(pack_params(model.params())), batch, options, seed).scalar();
}

GaussianPotential encode_views(const ProbNerfModel& model, const std::vector<Image>& images,
                               const std::vector<Camera>& cameras) {
  if (images.size() != cameras.size()) throw ShapeError("encode_views: images and cameras differ in count");
  const Index k = model.latent_dim();
  const Vector& packed = model.params().prior_potential;
  GaussianPotential prior{packed.head(k), (-2.0 * packed.tail(k)).array().exp().matrix()};
  std::vector<GaussianPotential> views;
  for (std::size_t v = 0; v < images.size(); ++v) {
    views.push_back(encode_view(model.encoder(), model.params().encoder, images[v], cameras[v]));
  }
  return pool_potentials(prior, views);
}

}  // namespace probnerf
