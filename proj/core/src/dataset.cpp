#include "probnerf/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "probnerf/binary_io.hpp"
#include "probnerf/errors.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

using nlohmann::json;
namespace fs = std::filesystem;

std::string camera_mode_name(CameraMode mode) {
  return mode == CameraMode::kEquallySpaced ? "equally-spaced" : "uniform-random";
}

CameraMode parse_camera_mode(const std::string& name) {
  if (name == "equally-spaced") return CameraMode::kEquallySpaced;
  if (name == "uniform-random") return CameraMode::kUniformRandom;
  throw std::invalid_argument("unknown camera mode '" + name + "'");
}

std::vector<double> sample_azimuths(int n, std::uint64_t seed, CameraMode mode) {
  if (n < 1) throw std::invalid_argument("sample_cameras: n must be >= 1");
  std::vector<double> az(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (int k = 0; k < n; ++k) {
    az[static_cast<std::size_t>(k)] = mode == CameraMode::kEquallySpaced
                                          ? 2.0 * std::numbers::pi * k / n
                                          : rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return az;
}

Camera camera_at_azimuth(double azimuth, const CameraRig& rig) {
  const Eigen::Vector3d eye(rig.radius * std::sin(azimuth), 0.0, rig.radius * std::cos(azimuth));
  return Camera::look_at(eye, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), rig.vertical_fov,
                         rig.width, rig.height);
}

std::vector<Camera> sample_cameras(int n, const CameraRig& rig, std::uint64_t seed, CameraMode mode) {
  std::vector<Camera> cams;
  for (double a : sample_azimuths(n, seed, mode)) cams.push_back(camera_at_azimuth(a, rig));
  return cams;
}

CameraRig DatasetSpec::rig() const {
  return {radius, fov_degrees * std::numbers::pi / 180.0, image_size, image_size};
}

ShapeFamily family_for_object(const DatasetSpec& spec, int id) {
  if (spec.family == "mixed") {
    static constexpr ShapeFamily all[] = {ShapeFamily::kBoxStack, ShapeFamily::kTwoLimb,
                                          ShapeFamily::kRandomBlobs};
    return all[id % 3];
  }
  return parse_family(spec.family);
}

std::uint64_t object_seed(const DatasetSpec& spec, int id) {
  return derive_seed(spec.seed, static_cast<std::uint64_t>(id));
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.n_objects < 0 || spec.views_per_object < 1 || spec.image_size < 1) {
    throw std::invalid_argument("dataset spec: counts must be positive");
  }
  Dataset d{spec, {}};
  const CameraRig rig = spec.rig();
  for (int id = 0; id < spec.n_objects; ++id) {
    DatasetEntry e;
    e.id = id;
    e.seed = object_seed(spec, id);
    e.family = family_for_object(spec, id);
    const VoxelObject obj = generate_object(e.seed, e.family, spec.scene);
    for (double az : sample_azimuths(spec.views_per_object, derive_seed(e.seed, 1), spec.camera_mode)) {
      View v{Image(), camera_at_azimuth(az, rig), az};
      v.image = oracle_render(obj, v.camera, spec.scene.background);
      e.views.push_back(std::move(v));
    }
    d.entries.push_back(std::move(e));
  }
  return d;
}

namespace {

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
Eigen::Vector3d vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json spec_json(const DatasetSpec& s) {
  return {{"n_objects", s.n_objects},
          {"views_per_object", s.views_per_object},
          {"image_size", s.image_size},
          {"seed", s.seed},
          {"family", s.family},
          {"camera_mode", camera_mode_name(s.camera_mode)},
          {"radius", s.radius},
          {"fov_degrees", s.fov_degrees},
          {"grid_size", s.scene.grid_size},
          {"lo", vec3(s.scene.lo)},
          {"hi", vec3(s.scene.hi)},
          {"background", vec3(s.scene.background)}};
}

DatasetSpec spec_from(const json& j) {
  DatasetSpec s;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("n_objects", s.n_objects);
  get("views_per_object", s.views_per_object);
  get("image_size", s.image_size);
  get("seed", s.seed);
  get("family", s.family);
  if (j.contains("camera_mode")) s.camera_mode = parse_camera_mode(j["camera_mode"].get<std::string>());
  get("radius", s.radius);
  get("fov_degrees", s.fov_degrees);
  get("grid_size", s.scene.grid_size);
  if (j.contains("lo")) s.scene.lo = vec3(j["lo"]);
  if (j.contains("hi")) s.scene.hi = vec3(j["hi"]);
  if (j.contains("background")) s.scene.background = vec3(j["background"]);
  return s;
}

std::string view_file(int id, int v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "images/obj%04d_view%02d.ppm", id, v);
  return buf;
}

json matrix_json(const Eigen::Matrix4d& m) {
  json a = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  }
  return a;
}

Eigen::Matrix4d matrix_from(const json& a) {
  if (!a.is_array() || a.size() != 16) throw FormatError("camera matrix must have 16 entries");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = a[static_cast<std::size_t>(4 * r + c)].get<double>();
  }
  return m;
}

}  // namespace

std::string dataset_spec_to_json(const DatasetSpec& spec) { return spec_json(spec).dump(2); }

DatasetSpec dataset_spec_from_json(const std::string& text) {
  try {
    return spec_from(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset spec: ") + e.what());
  }
}

void write_dataset(const Dataset& d, const fs::path& dir) {
  fs::create_directories(dir / "images");
  json manifest;
  manifest["version"] = 1;
  manifest["spec"] = spec_json(d.spec);
  json objects = json::array(), cameras = json::object();
  for (const DatasetEntry& e : d.entries) {
    json views = json::array();
    for (std::size_t v = 0; v < e.views.size(); ++v) {
      const View& view = e.views[v];
      const std::string file = view_file(e.id, static_cast<int>(v));
      write_ppm(dir / file, view.image);
      views.push_back({{"file", file}, {"azimuth", view.azimuth}});
      cameras[file] = {{"camera_to_world", matrix_json(view.camera.camera_to_world())},
                       {"vertical_fov", view.camera.vertical_fov()},
                       {"width", view.camera.width()},
                       {"height", view.camera.height()}};
    }
    objects.push_back({{"id", e.id}, {"seed", e.seed}, {"family", family_name(e.family)}, {"views", views}});
  }
  manifest["objects"] = objects;
  manifest["cameras_file"] = "cameras.json";
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  io::write_file(dir / "cameras.json", cameras.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  try {
    const json manifest = json::parse(io::read_file(dir / "manifest.json"));
    const json cameras = json::parse(io::read_file(dir / manifest.value("cameras_file", "cameras.json")));
    d.spec = spec_from(manifest.at("spec"));
    for (const json& o : manifest.at("objects")) {
      DatasetEntry e;
      e.id = o.at("id").get<int>();
      e.seed = o.at("seed").get<std::uint64_t>();
      e.family = parse_family(o.at("family").get<std::string>());
      for (const json& v : o.at("views")) {
        const std::string file = v.at("file").get<std::string>();
        const json& c = cameras.at(file);
        View view{read_ppm(dir / file),
                  Camera(matrix_from(c.at("camera_to_world")), c.at("vertical_fov").get<double>(),
                         c.at("width").get<int>(), c.at("height").get<int>()),
                  v.value("azimuth", 0.0)};
        e.views.push_back(std::move(view));
      }
      d.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError("dataset " + dir.string() + ": " + e.what());
  }
  return d;
}

Dataset build_dataset(const DatasetSpec& spec, const fs::path& dir) {
  Dataset d = generate_dataset(spec);
  write_dataset(d, dir);
  return d;
}

Observation crop_view(const Image& image, const Camera& camera, const PixelRegion& region) {
  if (image.width != camera.width() || image.height != camera.height()) {
    throw ShapeError("crop_view: image and camera sizes differ");
  }
  if (region.rows <= 0 || region.cols <= 0) throw std::invalid_argument("crop_view: empty region");
  if (region.row < 0 || region.col < 0 || region.row + region.rows > image.height ||
      region.col + region.cols > image.width) {
    throw std::out_of_range("crop_view: region outside the image");
  }
  Observation obs;
  obs.pixels.resize(3, static_cast<Index>(region.rows) * region.cols);
  Index n = 0;
  for (int r = region.row; r < region.row + region.rows; ++r) {
    for (int c = region.col; c < region.col + region.cols; ++c) {
      obs.rays.push_back(camera.pixel_ray(r, c));
      obs.pixels.col(n++) = image.at(r, c);
    }
  }
  return obs;
}

Observation full_view(const Image& image, const Camera& camera) {
  return crop_view(image, camera, PixelRegion::full(image.width, image.height));
}

Observation concat_observations(const std::vector<Observation>& parts) {
  Observation out;
  Index n = 0;
  for (const Observation& p : parts) n += p.size();
  out.pixels.resize(3, n);
  Index k = 0;
  for (const Observation& p : parts) {
    out.rays.insert(out.rays.end(), p.rays.begin(), p.rays.end());
    out.pixels.middleCols(k, p.size()) = p.pixels;
    k += p.size();
  }
  return out;
}

}  // namespace probnerf
