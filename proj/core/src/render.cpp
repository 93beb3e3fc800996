#include "probnerf/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "probnerf/ops.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

void FoamScene::validate() const {
  if (grid_size < 1) throw ShapeError("FoamScene: grid_size must be >= 1");
  if (!(lo.array() < hi.array()).all()) throw ShapeError("FoamScene: require lo < hi per axis");
  if ((background.array() < 0.0).any() || (background.array() > 1.0).any()) {
    throw ShapeError("FoamScene: background must lie in [0,1]^3");
  }
}

std::optional<std::pair<double, double>> box_segment(const Ray& ray, const Eigen::Vector3d& lo,
                                                     const Eigen::Vector3d& hi) {
  double enter = 0.0;
  double exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a], d = ray.direction[a];
    if (d == 0.0) {
      if (o < lo[a] || o > hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - o) / d, t1 = (hi[a] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    enter = std::max(enter, t0);
    exit = std::min(exit, t1);
  }
  if (exit < enter) return std::nullopt;
  return std::make_pair(enter, exit);
}

namespace {

bool inside_other_axes(const Eigen::Vector3d& p, int axis, const FoamScene& scene) {
  for (int b = 0; b < 3; ++b) {
    if (b == axis) continue;
    if (p[b] < scene.lo[b] - kHitMergeTolerance || p[b] > scene.hi[b] + kHitMergeTolerance) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Hit> foam_intersections(const Ray& ray, const FoamScene& scene) {
  std::vector<Hit> hits;
  const auto segment = box_segment(ray, scene.lo, scene.hi);
  if (!segment) return hits;
  const auto [enter, exit] = *segment;
  const int g = scene.grid_size;

  for (int a = 0; a < 3; ++a) {
    const double d = ray.direction[a];
    if (d == 0.0) continue;
    const double o = ray.origin[a];
    const double cell = (scene.hi[a] - scene.lo[a]) / g;
    // Plane indices whose crossing falls in [enter, exit], widened by one.
    const double c0 = (o + d * enter - scene.lo[a]) / cell;
    const double c1 = (o + d * exit - scene.lo[a]) / cell;
    const int first = std::max(0, static_cast<int>(std::floor(std::min(c0, c1))) - 1);
    const int last = std::min(g, static_cast<int>(std::ceil(std::max(c0, c1))) + 1);
    for (int i = first; i <= last; ++i) {
      const double plane = scene.lo[a] + (scene.hi[a] - scene.lo[a]) * i / g;
      const double t = (plane - o) / d;
      if (t < 0.0) continue;
      Eigen::Vector3d p = ray.origin + t * ray.direction;
      p[a] = plane;
      if (!inside_other_axes(p, a, scene)) continue;
      hits.push_back({t, p});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t < y.t; });
  std::vector<Hit> merged;
  merged.reserve(hits.size());
  for (const Hit& h : hits) {
    if (!merged.empty() && h.t - merged.back().t <= kHitMergeTolerance) continue;
    merged.push_back(h);
  }
  return merged;
}

namespace {

SampleBatch assemble(const std::vector<Eigen::Vector3d>& points,
                     const std::vector<Eigen::Vector3d>& directions,
                     const std::vector<double>& scales, std::vector<Index> offsets,
                     const FoamScene& scene, int encoding_order) {
  const Index n = static_cast<Index>(points.size());
  Matrix pos(3, n), dir(3, n);
  SampleBatch batch;
  batch.opacity_scale.resize(1, n);
  for (Index i = 0; i < n; ++i) {
    pos.col(i) = points[static_cast<std::size_t>(i)];
    dir.col(i) = directions[static_cast<std::size_t>(i)];
    batch.opacity_scale(0, i) = scales[static_cast<std::size_t>(i)];
  }
  batch.position_features = encode_columns(pos, encoding_order);
  batch.direction_features = encode_columns(dir, encoding_order);
  batch.offsets = std::move(offsets);
  batch.background = scene.background;
  return batch;
}

}  // namespace

SampleBatch prepare_foam(std::span<const Ray> rays, const FoamScene& scene, int encoding_order) {
  scene.validate();
  std::vector<Eigen::Vector3d> points, directions;
  std::vector<double> scales;
  std::vector<Index> offsets{0};
  const double scale = 1.0 / scene.grid_size;
  for (const Ray& ray : rays) {
    for (const Hit& h : foam_intersections(ray, scene)) {
      points.push_back(h.point);
      directions.push_back(ray.direction);
      scales.push_back(scale);
    }
    offsets.push_back(static_cast<Index>(points.size()));
  }
  return assemble(points, directions, scales, std::move(offsets), scene, encoding_order);
}

SampleBatch prepare_quadrature(std::span<const Ray> rays, const FoamScene& scene,
                               int encoding_order, int n_samples, std::uint64_t seed) {
  scene.validate();
  if (n_samples < 1) throw std::invalid_argument("prepare_quadrature: n_samples must be >= 1");
  std::vector<Eigen::Vector3d> points, directions;
  std::vector<double> scales;
  std::vector<Index> offsets{0};
  std::vector<double> ts(static_cast<std::size_t>(n_samples));
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const Ray& ray = rays[r];
    const auto segment = box_segment(ray, scene.lo, scene.hi);
    if (segment) {
      const auto [t0, t1] = *segment;
      const double width = (t1 - t0) / n_samples;
      Rng rng(seed + r);
      for (int i = 0; i < n_samples; ++i) ts[static_cast<std::size_t>(i)] = t0 + (i + rng.uniform()) * width;
      for (int i = 0; i < n_samples; ++i) {
        const double t = ts[static_cast<std::size_t>(i)];
        const double next = (i + 1 < n_samples) ? ts[static_cast<std::size_t>(i + 1)] : t1;
        points.push_back(ray.origin + t * ray.direction);
        directions.push_back(ray.direction);
        scales.push_back(next - t);
      }
    }
    offsets.push_back(static_cast<Index>(points.size()));
  }
  return assemble(points, directions, scales, std::move(offsets), scene, encoding_order);
}

ad::Var render_batch(const ad::Var& weights, const FieldConfig& config, const SampleBatch& batch) {
  ad::Tape& tape = weights.tape();
  ad::Var pf = tape.reference(batch.position_features);
  ad::Var df = tape.reference(batch.direction_features);
  FieldVars field = field_forward(weights, config, pf, df);
  ad::Var optical_depth = ad::mul_const(field.sigma, batch.opacity_scale);
  ad::Var alpha = ad::affine_scalar(ad::exp(-optical_depth), -1.0, 1.0);
  return ad::composite(alpha, field.color, batch.offsets, batch.background);
}

namespace {

Eigen::Matrix3Xd render_prepared(const FieldWeights& weights, const SampleBatch& batch) {
  ad::Tape tape;
  ad::Var w = tape.constant(weights.flat());
  return render_batch(w, weights.config(), batch).value();
}

}  // namespace

Eigen::Vector3d render_ray_foam(const FieldWeights& weights, const Ray& ray,
                                const FoamScene& scene) {
  const SampleBatch batch = prepare_foam(std::span<const Ray>(&ray, 1), scene,
                                         weights.config().encoding_order);
  return render_prepared(weights, batch).col(0);
}

Eigen::Vector3d render_ray_quadrature(const FieldWeights& weights, const Ray& ray,
                                      const FoamScene& scene, int n_samples, std::uint64_t seed) {
  const SampleBatch batch = prepare_quadrature(std::span<const Ray>(&ray, 1), scene,
                                               weights.config().encoding_order, n_samples, seed);
  return render_prepared(weights, batch).col(0);
}

Eigen::Matrix3Xd render_rays(const FieldWeights& weights, std::span<const Ray> rays,
                             const FoamScene& scene, const RendererChoice& choice) {
  constexpr std::size_t kChunk = 512;
  Eigen::Matrix3Xd out(3, static_cast<Index>(rays.size()));
  for (std::size_t start = 0; start < rays.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, rays.size() - start);
    const auto chunk = rays.subspan(start, n);
    const SampleBatch batch =
        choice.kind == RendererKind::kFoam
            ? prepare_foam(chunk, scene, weights.config().encoding_order)
            : prepare_quadrature(chunk, scene, weights.config().encoding_order, choice.n_samples,
                                 choice.seed + start);
    out.middleCols(static_cast<Index>(start), static_cast<Index>(n)) =
        render_prepared(weights, batch);
  }
  return out;
}

Image render_image(const FieldWeights& weights, const Camera& camera, const FoamScene& scene,
                   const RendererChoice& choice) {
  const std::vector<Ray> rays = generate_rays(camera);
  Image img(camera.width(), camera.height());
  img.pixels = render_rays(weights, rays, scene, choice);
  return img;
}

}  // namespace probnerf
