#pragma once

// Foam renderer (density concentrated on the faces of a cubic lattice, so a
// ray's color is a finite alpha-composite over plane crossings) and the
// stratified quadrature renderer it is compared against.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "probnerf/autodiff.hpp"
#include "probnerf/camera.hpp"
#include "probnerf/field.hpp"
#include "probnerf/image.hpp"

namespace probnerf {

struct FoamScene {
  int grid_size = 16;
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(1.0);
  Eigen::Vector3d background = Eigen::Vector3d::Ones();

  void validate() const;
};

struct Hit {
  double t = 0.0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

inline constexpr double kHitMergeTolerance = 1e-9;

// Parameter interval [enter, exit] of the ray inside the box, clipped to t >= 0.
std::optional<std::pair<double, double>> box_segment(const Ray& ray, const Eigen::Vector3d& lo,
                                                     const Eigen::Vector3d& hi);

// Crossings of the ray with the 3(G+1) lattice planes that lie inside the
// box, sorted by t, with crossings closer than kHitMergeTolerance merged.
std::vector<Hit> foam_intersections(const Ray& ray, const FoamScene& scene);

// Precomputed sample geometry for a set of rays. Ray r owns samples
// [offsets[r], offsets[r+1]); sample opacity is 1 - exp(-sigma * opacity_scale).
struct SampleBatch {
  Matrix position_features;   // encoded positions, F x P
  Matrix direction_features;  // encoded ray directions, F x P
  Matrix opacity_scale;       // 1 x P
  std::vector<Index> offsets;
  Eigen::Vector3d background = Eigen::Vector3d::Ones();

  Index ray_count() const { return static_cast<Index>(offsets.size()) - 1; }
  Index sample_count() const { return offsets.empty() ? 0 : offsets.back(); }
  Index samples_on_ray(Index r) const { return offsets[r + 1] - offsets[r]; }
};

// Foam geometry: opacity_scale = 1 / G, giving the squash 1 - exp(-sigma / G).
SampleBatch prepare_foam(std::span<const Ray> rays, const FoamScene& scene, int encoding_order);

// Stratified quadrature: n_samples strata over each ray's in-box segment,
// one uniform draw per stratum. Ray i draws from the stream seeded by
// seed + i, so a batch is independent of how rays are grouped.
SampleBatch prepare_quadrature(std::span<const Ray> rays, const FoamScene& scene,
                               int encoding_order, int n_samples, std::uint64_t seed);

// Differentiable render of a batch; returns 3 x R colors.
ad::Var render_batch(const ad::Var& weights, const FieldConfig& config, const SampleBatch& batch);

Eigen::Vector3d render_ray_foam(const FieldWeights& weights, const Ray& ray,
                                const FoamScene& scene);
Eigen::Vector3d render_ray_quadrature(const FieldWeights& weights, const Ray& ray,
                                      const FoamScene& scene, int n_samples, std::uint64_t seed);

enum class RendererKind { kFoam, kQuadrature };

struct RendererChoice {
  RendererKind kind = RendererKind::kFoam;
  int n_samples = 64;
  std::uint64_t seed = 0;
};

// Colors for arbitrary rays, evaluated in fixed-size chunks.
Eigen::Matrix3Xd render_rays(const FieldWeights& weights, std::span<const Ray> rays,
                             const FoamScene& scene, const RendererChoice& choice = {});

Image render_image(const FieldWeights& weights, const Camera& camera, const FoamScene& scene,
                   const RendererChoice& choice = {});

}  // namespace probnerf
