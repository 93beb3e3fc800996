#include "probnerf/camera.hpp"

#include <cmath>
#include <numbers>

namespace probnerf {

Camera::Camera(const Eigen::Matrix4d& camera_to_world, double vertical_fov, int width, int height)
    : camera_to_world_(camera_to_world),
      vertical_fov_(vertical_fov),
      width_(width),
      height_(height) {
  if (!camera_to_world.allFinite()) throw InvalidCameraError("camera matrix is not finite");
  const Eigen::Matrix3d r = camera_to_world.block<3, 3>(0, 0);
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err >= 1e-6) throw InvalidCameraError("camera rotation block is not orthonormal");
  if (!(vertical_fov > 0.0 && vertical_fov < std::numbers::pi)) {
    throw InvalidCameraError("vertical field of view must lie in (0, pi)");
  }
  if (width < 1 || height < 1) throw InvalidCameraError("image dimensions must be positive");
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up, double vertical_fov, int width, int height) {
  const Eigen::Vector3d forward = target - eye;
  if (forward.norm() < 1e-12) throw InvalidCameraError("look_at: eye coincides with target");
  const Eigen::Vector3d back = -forward.normalized();
  const Eigen::Vector3d right_raw = up.cross(back);
  if (right_raw.norm() < 1e-12) throw InvalidCameraError("look_at: up is parallel to the view");
  const Eigen::Vector3d right = right_raw.normalized();
  const Eigen::Vector3d true_up = back.cross(right);
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 1>(0, 0) = right;
  m.block<3, 1>(0, 1) = true_up;
  m.block<3, 1>(0, 2) = back;
  m.block<3, 1>(0, 3) = eye;
  return Camera(m, vertical_fov, width, height);
}

Ray Camera::pixel_ray(int row, int col) const {
  const double tan_half = std::tan(0.5 * vertical_fov_);
  const double aspect = static_cast<double>(width_) / static_cast<double>(height_);
  const double x = (2.0 * (col + 0.5) / width_ - 1.0) * tan_half * aspect;
  const double y = (1.0 - 2.0 * (row + 0.5) / height_) * tan_half;
  const Eigen::Vector3d local(x, y, -1.0);
  Ray ray;
  ray.origin = position();
  ray.direction = (camera_to_world_.block<3, 3>(0, 0) * local).normalized();
  return ray;
}

std::vector<Ray> generate_rays(const Camera& camera) {
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(camera.width()) * static_cast<std::size_t>(camera.height()));
  for (int r = 0; r < camera.height(); ++r) {
    for (int c = 0; c < camera.width(); ++c) rays.push_back(camera.pixel_ray(r, c));
  }
  return rays;
}

}  // namespace probnerf
