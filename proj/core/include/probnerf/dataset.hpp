#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "probnerf/camera.hpp"
#include "probnerf/image.hpp"
#include "probnerf/observation.hpp"
#include "probnerf/render.hpp"
#include "probnerf/voxel.hpp"

namespace probnerf {

enum class CameraMode { kUniformRandom, kEquallySpaced };

std::string camera_mode_name(CameraMode mode);
CameraMode parse_camera_mode(const std::string& name);

struct CameraRig {
  double radius = 3.0;
  double vertical_fov = 60.0 * 3.14159265358979323846 / 180.0;
  int width = 32;
  int height = 32;
};

// Cameras on the circle of `radius` in the y = 0 plane, looking at the
// origin with +y up. Azimuth 0 sits on +z (the front view); equally spaced
// mode uses azimuths 2 pi k / n.
std::vector<Camera> sample_cameras(int n, const CameraRig& rig, std::uint64_t seed, CameraMode mode);
std::vector<double> sample_azimuths(int n, std::uint64_t seed, CameraMode mode);
Camera camera_at_azimuth(double azimuth, const CameraRig& rig);

struct View {
  Image image;
  Camera camera;
  double azimuth = 0.0;
};

struct DatasetEntry {
  int id = 0;
  std::uint64_t seed = 0;
  ShapeFamily family = ShapeFamily::kTwoLimb;
  std::vector<View> views;
};

struct DatasetSpec {
  int n_objects = 64;
  int views_per_object = 10;
  int image_size = 32;
  std::uint64_t seed = 0;
  std::string family = "two-limb";  // a family name or "mixed"
  CameraMode camera_mode = CameraMode::kUniformRandom;
  double radius = 3.0;
  double fov_degrees = 60.0;
  FoamScene scene;

  CameraRig rig() const;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<DatasetEntry> entries;
};

ShapeFamily family_for_object(const DatasetSpec& spec, int id);
std::uint64_t object_seed(const DatasetSpec& spec, int id);

// Oracle-rendered entries held in memory; pixels are exactly 8-bit levels.
Dataset generate_dataset(const DatasetSpec& spec);

// Writes manifest.json, cameras.json and images/*.ppm under `dir`.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);
Dataset build_dataset(const DatasetSpec& spec, const std::filesystem::path& dir);

std::string dataset_spec_to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const std::string& text);

struct PixelRegion {
  int row = 0;
  int col = 0;
  int rows = 0;
  int cols = 0;

  static PixelRegion full(int width, int height) { return {0, 0, height, width}; }
  static PixelRegion left_half(int width, int height) { return {0, 0, height, width / 2}; }
  static PixelRegion right_half(int width, int height) { return {0, width / 2, height, width - width / 2}; }
};

// Pixels inside `region` (row-major) together with their rays.
Observation crop_view(const Image& image, const Camera& camera, const PixelRegion& region);
Observation full_view(const Image& image, const Camera& camera);
Observation concat_observations(const std::vector<Observation>& parts);

}  // namespace probnerf
