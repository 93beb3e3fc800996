#pragma once

// Straight-line reference implementations that share no code with the
// library's tape-based paths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "probnerf/camera.hpp"
#include "probnerf/field.hpp"
#include "probnerf/render.hpp"

namespace oracle {

using Eigen::VectorXd;

inline VectorXd encode(const Eigen::Vector3d& x, int order) {
  VectorXd out(3 * (2 * order + 1));
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    out[k++] = x[i];
    for (int j = 0; j < order; ++j) {
      const double a = std::pow(2.0, j) * std::numbers::pi * x[i];
      out[k++] = std::sin(a);
      out[k++] = std::sin(a + 0.5);
    }
  }
  return out;
}

// Dense layer reading a row-major weight block followed by its bias.
inline VectorXd dense(const VectorXd& flat, long& at, long out, const VectorXd& in) {
  VectorXd y(out);
  for (long r = 0; r < out; ++r) {
    double acc = 0.0;
    for (long c = 0; c < in.size(); ++c) acc += flat[at + r * in.size() + c] * in[c];
    y[r] = acc;
  }
  at += out * in.size();
  for (long r = 0; r < out; ++r) y[r] += flat[at + r];
  at += out;
  return y;
}

inline VectorXd relu(VectorXd v) {
  for (auto& x : v) x = std::max(0.0, x);
  return v;
}

struct FieldSample {
  double sigma;
  Eigen::Vector3d color;
};

inline FieldSample field(const VectorXd& flat, const probnerf::FieldConfig& cfg, const Eigen::Vector3d& x,
                         const Eigen::Vector3d& v) {
  const VectorXd px = encode(x, cfg.encoding_order), pv = encode(v, cfg.encoding_order);
  long at = 0;
  VectorXd h = px;
  for (int l = 0; l < cfg.hidden_layers_per_mlp; ++l) h = relu(dense(flat, at, cfg.hidden_width, h));
  const double raw = dense(flat, at, 1, h)[0];
  const double sigma = raw > 0 ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
  VectorXd in(px.size() + pv.size() + 1);
  in << px, pv, sigma;
  h = in;
  for (int l = 0; l < cfg.hidden_layers_per_mlp; ++l) h = relu(dense(flat, at, cfg.hidden_width, h));
  const VectorXd rgb = dense(flat, at, 3, h);
  Eigen::Vector3d c;
  for (int i = 0; i < 3; ++i) c[i] = 1.0 / (1.0 + std::exp(-rgb[i]));
  return {sigma, c};
}

// Every lattice plane tested against the ray, no clipping shortcuts.
inline std::vector<double> plane_hits(const probnerf::Ray& ray, const probnerf::FoamScene& scene) {
  std::vector<double> ts;
  const double tol = 1e-9;
  for (int a = 0; a < 3; ++a) {
    if (ray.direction[a] == 0.0) continue;
    for (int i = 0; i <= scene.grid_size; ++i) {
      const double plane = scene.lo[a] + (scene.hi[a] - scene.lo[a]) * i / scene.grid_size;
      const double t = (plane - ray.origin[a]) / ray.direction[a];
      if (t < 0) continue;
      const Eigen::Vector3d p = ray.origin + t * ray.direction;
      bool inside = true;
      for (int b = 0; b < 3; ++b) {
        if (b == a) continue;
        inside &= p[b] >= scene.lo[b] - tol && p[b] <= scene.hi[b] + tol;
      }
      if (inside) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  std::vector<double> merged;
  for (double t : ts) {
    if (merged.empty() || t - merged.back() > 1e-9) merged.push_back(t);
  }
  return merged;
}

inline Eigen::Vector3d render_ray(const VectorXd& flat, const probnerf::FieldConfig& cfg, const probnerf::Ray& ray,
                                  const probnerf::FoamScene& scene, int* evaluations = nullptr) {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double transmittance = 1.0;
  const auto hits = plane_hits(ray, scene);
  if (evaluations) *evaluations = static_cast<int>(hits.size());
  for (double t : hits) {
    const FieldSample s = field(flat, cfg, ray.origin + t * ray.direction, ray.direction);
    const double alpha = 1.0 - std::exp(-s.sigma / scene.grid_size);
    color += transmittance * alpha * s.color;
    transmittance *= 1.0 - alpha;
  }
  return color + transmittance * scene.background;
}

inline double log_likelihood(const VectorXd& flat, const probnerf::FieldConfig& cfg,
                             const std::vector<probnerf::Ray>& rays, const Eigen::Matrix3Xd& pixels, double s,
                             const probnerf::FoamScene& scene) {
  double total = 0.0;
  for (std::size_t n = 0; n < rays.size(); ++n) {
    const Eigen::Vector3d c = render_ray(flat, cfg, rays[n], scene);
    for (int k = 0; k < 3; ++k) {
      const double r = pixels(k, static_cast<long>(n)) - c[k];
      total += -0.5 * r * r / (s * s) - std::log(s * std::sqrt(2.0 * std::numbers::pi));
    }
  }
  return total;
}

}  // namespace oracle
