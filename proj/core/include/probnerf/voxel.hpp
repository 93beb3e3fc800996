#pragma once

// Procedural voxel objects and an independent grid-marching renderer used as
// ground truth.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "probnerf/camera.hpp"
#include "probnerf/image.hpp"
#include "probnerf/render.hpp"

namespace probnerf {

enum class ShapeFamily { kBoxStack, kTwoLimb, kRandomBlobs };

std::string family_name(ShapeFamily family);
ShapeFamily parse_family(const std::string& name);

struct AxisBox {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
  Eigen::Vector3d color;
};

struct VoxelObject {
  int grid_size = 16;
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(1.0);
  std::vector<std::uint8_t> occupancy;  // x fastest, then y, then z
  Eigen::Matrix3Xd albedo;
  std::uint64_t seed = 0;
  ShapeFamily family = ShapeFamily::kBoxStack;
  std::vector<AxisBox> boxes;  // generating boxes (box-stack only)
  double limb_angle = 0.0;     // signed hidden-limb angle in radians (two-limb only)

  static VoxelObject empty(const FoamScene& scene);

  Index index(int i, int j, int k) const {
    return static_cast<Index>(i) + static_cast<Index>(grid_size) * (j + static_cast<Index>(grid_size) * k);
  }
  bool occupied(int i, int j, int k) const { return occupancy[static_cast<std::size_t>(index(i, j, k))] != 0; }
  Eigen::Vector3d cell_center(int i, int j, int k) const;
  double cell_size() const { return (hi.x() - lo.x()) / grid_size; }
  Index occupied_count() const;
};

struct TwoLimbParams {
  double visible_angle = -0.5;  // radians below horizontal, in the x-y plane
  double hidden_angle = 0.4;    // signed radians from -z toward +x
  double hidden_height = 0.0;
  Eigen::Vector3d torso_color{0.8, 0.3, 0.2};
  Eigen::Vector3d head_color{0.9, 0.8, 0.6};
  Eigen::Vector3d visible_color{0.2, 0.5, 0.8};
  Eigen::Vector3d hidden_color{0.2, 0.7, 0.3};
};

VoxelObject generate_object(std::uint64_t seed, ShapeFamily family, const FoamScene& scene = {});
VoxelObject make_two_limb(const TwoLimbParams& params, const FoamScene& scene = {});

Eigen::Vector3d oracle_ray(const VoxelObject& object, const Ray& ray, const Eigen::Vector3d& background);
Image oracle_render(const VoxelObject& object, const Camera& camera, const Eigen::Vector3d& background);

}  // namespace probnerf
