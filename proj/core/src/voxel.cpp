#include "probnerf/voxel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "probnerf/rng.hpp"

namespace probnerf {

std::string family_name(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::kBoxStack: return "box-stack";
    case ShapeFamily::kTwoLimb: return "two-limb";
    case ShapeFamily::kRandomBlobs: return "random-blobs";
  }
  return "unknown";
}

ShapeFamily parse_family(const std::string& name) {
  if (name == "box-stack") return ShapeFamily::kBoxStack;
  if (name == "two-limb") return ShapeFamily::kTwoLimb;
  if (name == "random-blobs") return ShapeFamily::kRandomBlobs;
  throw std::invalid_argument("unknown shape family '" + name + "'");
}

VoxelObject VoxelObject::empty(const FoamScene& scene) {
  scene.validate();
  VoxelObject o;
  o.grid_size = scene.grid_size;
  o.lo = scene.lo;
  o.hi = scene.hi;
  const Index n = static_cast<Index>(scene.grid_size) * scene.grid_size * scene.grid_size;
  o.occupancy.assign(static_cast<std::size_t>(n), 0);
  o.albedo = Eigen::Matrix3Xd::Zero(3, n);
  return o;
}

Eigen::Vector3d VoxelObject::cell_center(int i, int j, int k) const {
  const Eigen::Vector3d f((i + 0.5) / grid_size, (j + 0.5) / grid_size, (k + 0.5) / grid_size);
  return lo + (hi - lo).cwiseProduct(f);
}

Index VoxelObject::occupied_count() const {
  Index n = 0;
  for (auto v : occupancy) n += v != 0;
  return n;
}

namespace {

// Colors are snapped to 8-bit levels so stored images are lossless.
Eigen::Vector3d quantized_color(const Eigen::Vector3d& c) {
  Eigen::Vector3d q;
  for (int i = 0; i < 3; ++i) q[i] = quantize_channel(c[i]) / 255.0;
  return q;
}

Eigen::Vector3d random_color(Rng& rng) {
  return quantized_color({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)});
}

template <typename Inside>
void paint(VoxelObject& o, const Inside& inside, const Eigen::Vector3d& color) {
  const Eigen::Vector3d c = quantized_color(color);
  for (int k = 0; k < o.grid_size; ++k) {
    for (int j = 0; j < o.grid_size; ++j) {
      for (int i = 0; i < o.grid_size; ++i) {
        if (!inside(o.cell_center(i, j, k))) continue;
        const Index id = o.index(i, j, k);
        o.occupancy[static_cast<std::size_t>(id)] = 1;
        o.albedo.col(id) = c;
      }
    }
  }
}

void paint_box(VoxelObject& o, const AxisBox& b) {
  paint(o, [&](const Eigen::Vector3d& p) {
    return (p.array() >= b.lo.array()).all() && (p.array() <= b.hi.array()).all();
  }, b.color);
}

void paint_rod(VoxelObject& o, const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
               const Eigen::Vector3d& color) {
  const Eigen::Vector3d ab = b - a;
  paint(o, [&](const Eigen::Vector3d& p) {
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm() <= radius;
  }, color);
}

VoxelObject box_stack(std::uint64_t seed, const FoamScene& scene) {
  Rng rng(seed);
  VoxelObject o = VoxelObject::empty(scene);
  const double cell = o.cell_size();
  const int g = o.grid_size;
  const int n = 2 + static_cast<int>(rng.uniform_index(5));
  // Boxes are snapped to voxel boundaries and stacked bottom to top.
  int floor = static_cast<int>(rng.uniform_index(static_cast<Index>(g / 4 + 1)));
  for (int b = 0; b < n && floor < g; ++b) {
    const int sx = 2 + static_cast<int>(rng.uniform_index(static_cast<Index>(g / 2 - 1)));
    const int sz = 2 + static_cast<int>(rng.uniform_index(static_cast<Index>(g / 2 - 1)));
    const int sy = 1 + static_cast<int>(rng.uniform_index(static_cast<Index>(std::max(1, g / 5))));
    const int top = std::min(g, floor + sy);
    const int x0 = static_cast<int>(rng.uniform_index(static_cast<Index>(g - sx + 1)));
    const int z0 = static_cast<int>(rng.uniform_index(static_cast<Index>(g - sz + 1)));
    AxisBox box;
    box.lo = o.lo + cell * Eigen::Vector3d(x0, floor, z0);
    box.hi = o.lo + cell * Eigen::Vector3d(x0 + sx, top, z0 + sz);
    box.color = random_color(rng);
    paint_box(o, box);
    o.boxes.push_back(box);
    floor = top;
  }
  return o;
}

VoxelObject random_blobs(std::uint64_t seed, const FoamScene& scene) {
  Rng rng(seed);
  VoxelObject o = VoxelObject::empty(scene);
  const Eigen::Vector3d mid = 0.5 * (o.lo + o.hi), half = 0.5 * (o.hi - o.lo);
  const int n = 2 + static_cast<int>(rng.uniform_index(5));
  for (int b = 0; b < n; ++b) {
    Eigen::Vector3d c, r;
    for (int i = 0; i < 3; ++i) {
      c[i] = mid[i] + half[i] * rng.uniform(-0.5, 0.5);
      r[i] = half[i] * rng.uniform(0.15, 0.45);
    }
    paint(o, [&](const Eigen::Vector3d& p) { return (p - c).cwiseQuotient(r).squaredNorm() <= 1.0; },
          random_color(rng));
  }
  if (o.occupied_count() == 0) {
    const int h = o.grid_size / 2;
    o.occupancy[static_cast<std::size_t>(o.index(h, h, h))] = 1;
    o.albedo.col(o.index(h, h, h)) = random_color(rng);
  }
  return o;
}

}  // namespace

VoxelObject make_two_limb(const TwoLimbParams& p, const FoamScene& scene) {
  VoxelObject o = VoxelObject::empty(scene);
  // Shapes are placed in a unit-scaled body frame and mapped onto the scene box.
  const Eigen::Vector3d mid = 0.5 * (o.lo + o.hi), half = 0.5 * (o.hi - o.lo);
  auto at = [&](double x, double y, double z) {
    return Eigen::Vector3d(mid.x() + half.x() * x, mid.y() + half.y() * y, mid.z() + half.z() * z);
  };
  const double r = 0.1 * half.x();
  paint_box(o, {at(-0.375, -0.625, -0.125), at(0.375, 0.375, 0.125), p.torso_color});
  paint_box(o, {at(-0.125, 0.375, -0.125), at(0.125, 0.625, 0.125), p.head_color});
  const Eigen::Vector3d shoulder = at(0.375, 0.25, 0.0);
  paint_rod(o, shoulder,
            shoulder + 0.5 * half.x() * Eigen::Vector3d(std::cos(p.visible_angle), std::sin(p.visible_angle), 0.0),
            r, p.visible_color);
  const Eigen::Vector3d back = at(0.0, p.hidden_height, -0.125);
  paint_rod(o, back,
            back + 0.55 * half.x() * Eigen::Vector3d(std::sin(p.hidden_angle), 0.0, -std::cos(p.hidden_angle)),
            r, p.hidden_color);
  o.family = ShapeFamily::kTwoLimb;
  o.limb_angle = p.hidden_angle;
  return o;
}

VoxelObject generate_object(std::uint64_t seed, ShapeFamily family, const FoamScene& scene) {
  VoxelObject o;
  switch (family) {
    case ShapeFamily::kBoxStack:
      o = box_stack(seed, scene);
      break;
    case ShapeFamily::kRandomBlobs:
      o = random_blobs(seed, scene);
      break;
    case ShapeFamily::kTwoLimb: {
      Rng rng(seed);
      constexpr double deg = std::numbers::pi / 180.0;
      TwoLimbParams p;
      p.visible_angle = rng.uniform(-60.0, 20.0) * deg;
      const double magnitude = rng.uniform(15.0, 35.0) * deg;
      p.hidden_angle = rng.uniform() < 0.5 ? -magnitude : magnitude;
      p.hidden_height = rng.uniform(-0.3, 0.1);
      p.torso_color = random_color(rng);
      p.head_color = random_color(rng);
      p.visible_color = random_color(rng);
      p.hidden_color = random_color(rng);
      o = make_two_limb(p, scene);
      break;
    }
  }
  o.seed = seed;
  o.family = family;
  return o;
}

Eigen::Vector3d oracle_ray(const VoxelObject& o, const Ray& ray, const Eigen::Vector3d& background) {
  const auto seg = box_segment(ray, o.lo, o.hi);
  if (!seg) return background;
  const int g = o.grid_size;
  const Eigen::Vector3d size = (o.hi - o.lo) / g;
  const Eigen::Vector3d start = ray.origin + seg->first * ray.direction;
  int cell[3], step[3];
  double t_max[3], t_delta[3];
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double u = (start[a] - o.lo[a]) / size[a];
    cell[a] = std::clamp(static_cast<int>(std::floor(u)), 0, g - 1);
    const double d = ray.direction[a];
    if (d > 0) {
      step[a] = 1;
      t_max[a] = (o.lo[a] + (cell[a] + 1) * size[a] - ray.origin[a]) / d;
      t_delta[a] = size[a] / d;
    } else if (d < 0) {
      step[a] = -1;
      t_max[a] = (o.lo[a] + cell[a] * size[a] - ray.origin[a]) / d;
      t_delta[a] = -size[a] / d;
    } else {
      step[a] = 0;
      t_max[a] = inf;
      t_delta[a] = inf;
    }
  }
  while (true) {
    if (o.occupied(cell[0], cell[1], cell[2])) return o.albedo.col(o.index(cell[0], cell[1], cell[2]));
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > seg->second) return background;
    cell[a] += step[a];
    if (cell[a] < 0 || cell[a] >= g) return background;
    t_max[a] += t_delta[a];
  }
}

Image oracle_render(const VoxelObject& object, const Camera& camera, const Eigen::Vector3d& background) {
  Image img(camera.width(), camera.height());
  for (int r = 0; r < camera.height(); ++r) {
    for (int c = 0; c < camera.width(); ++c) img.set(r, c, oracle_ray(object, camera.pixel_ray(r, c), background));
  }
  return img;
}

}  // namespace probnerf
