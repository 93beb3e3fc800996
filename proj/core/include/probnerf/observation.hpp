#pragma once

#include <vector>

#include <Eigen/Dense>

#include "probnerf/camera.hpp"
#include "probnerf/render.hpp"

namespace probnerf {

// An arbitrary set of observed pixels and the rays that produced them.
struct Observation {
  std::vector<Ray> rays;
  Eigen::Matrix3Xd pixels;

  Index size() const { return static_cast<Index>(rays.size()); }
};

// Observation with the foam sample geometry precomputed.
struct PreparedObservation {
  SampleBatch batch;
  Matrix pixels;  // 3 x N
  std::vector<Ray> rays;
};

PreparedObservation prepare_observation(const Observation& obs, const FoamScene& scene,
                                        int encoding_order);

}  // namespace probnerf
