#pragma once

#include <vector>

#include <Eigen/Dense>

#include "probnerf/errors.hpp"

namespace probnerf {

struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

// Pinhole camera. The camera looks down its local -z axis with +y up; the
// camera-to-world matrix maps local coordinates to world coordinates.
class Camera {
 public:
  Camera(const Eigen::Matrix4d& camera_to_world, double vertical_fov, int width, int height);

  static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up, double vertical_fov, int width, int height);

  const Eigen::Matrix4d& camera_to_world() const { return camera_to_world_; }
  double vertical_fov() const { return vertical_fov_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Eigen::Vector3d position() const { return camera_to_world_.block<3, 1>(0, 3); }
  Eigen::Vector3d optical_axis() const { return -camera_to_world_.block<3, 1>(0, 2); }

  // Ray through the center of pixel (row, col); row 0 is the top row.
  Ray pixel_ray(int row, int col) const;

 private:
  Eigen::Matrix4d camera_to_world_;
  double vertical_fov_;
  int width_;
  int height_;
};

// One ray per pixel, row-major from the top-left pixel.
std::vector<Ray> generate_rays(const Camera& camera);

}  // namespace probnerf
