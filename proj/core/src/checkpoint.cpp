#include "probnerf/checkpoint.hpp"

#include <json.hpp>

#include "probnerf/binary_io.hpp"
#include "probnerf/errors.hpp"

namespace probnerf {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "PNRFCKPT";

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json config_json(const ModelConfig& c) {
  json j;
  j["field"] = {{"encoding_order", c.field.encoding_order},
                {"hidden_width", c.field.hidden_width},
                {"hidden_layers_per_mlp", c.field.hidden_layers_per_mlp},
                {"grid_size", c.field.grid_size}};
  j["scene"] = {{"grid_size", c.scene.grid_size},
                {"lo", vec3_json(c.scene.lo)},
                {"hi", vec3_json(c.scene.hi)},
                {"background", vec3_json(c.scene.background)}};
  j["latent_dim"] = c.latent_dim;
  j["flow_hidden"] = c.flow_hidden;
  j["hypernet_hidden"] = c.hypernet_hidden;
  j["encoder"] = {{"image_size", c.encoder.image_size},
                  {"channels", c.encoder.channels},
                  {"kernel", c.encoder.kernel},
                  {"stride", c.encoder.stride},
                  {"camera_hidden", c.encoder.camera_hidden}};
  j["weight_variance"] = c.weight_variance;
  j["observation_scale"] = c.observation_scale;
  j["permutation_seed"] = c.permutation_seed;
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  if (j.contains("field")) {
    const json& f = j["field"];
    read_if(f, "encoding_order", c.field.encoding_order);
    read_if(f, "hidden_width", c.field.hidden_width);
    read_if(f, "hidden_layers_per_mlp", c.field.hidden_layers_per_mlp);
    read_if(f, "grid_size", c.field.grid_size);
    c.scene.grid_size = c.field.grid_size;
  }
  if (j.contains("scene")) {
    const json& s = j["scene"];
    read_if(s, "grid_size", c.scene.grid_size);
    if (s.contains("lo")) c.scene.lo = vec3_from(s["lo"]);
    if (s.contains("hi")) c.scene.hi = vec3_from(s["hi"]);
    if (s.contains("background")) c.scene.background = vec3_from(s["background"]);
  }
  read_if(j, "latent_dim", c.latent_dim);
  read_if(j, "flow_hidden", c.flow_hidden);
  read_if(j, "hypernet_hidden", c.hypernet_hidden);
  if (j.contains("encoder")) {
    const json& e = j["encoder"];
    read_if(e, "image_size", c.encoder.image_size);
    read_if(e, "channels", c.encoder.channels);
    read_if(e, "kernel", c.encoder.kernel);
    read_if(e, "stride", c.encoder.stride);
    read_if(e, "camera_hidden", c.encoder.camera_hidden);
  }
  read_if(j, "weight_variance", c.weight_variance);
  read_if(j, "observation_scale", c.observation_scale);
  read_if(j, "permutation_seed", c.permutation_seed);
  return c;
}

Vector round_vector(const Vector& v) { return v.cast<float>().cast<double>(); }

}  // namespace

std::string model_config_to_json(const ModelConfig& config) { return config_json(config).dump(2); }

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
}

ModelParams round_to_float(const ModelParams& p) {
  return {round_vector(p.flow), round_vector(p.hypernet), round_vector(p.encoder),
          round_vector(p.prior_potential)};
}

std::string encode_checkpoint(const ProbNerfModel& model) {
  const ModelParams& p = model.params();
  json header;
  header["config"] = config_json(model.config());
  header["lengths"] = {{"flow", p.flow.size()},
                       {"hypernet", p.hypernet.size()},
                       {"encoder", p.encoder.size()},
                       {"prior_potential", p.prior_potential.size()}};
  const std::string text = header.dump();
  std::string out(kMagic);
  io::put_u32(out, kCheckpointVersion);
  io::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  io::put_f32(out, p.flow);
  io::put_f32(out, p.hypernet);
  io::put_f32(out, p.encoder);
  io::put_f32(out, p.prior_potential);
  return out;
}

ProbNerfModel decode_checkpoint(const std::string& bytes) {
  io::Reader in(bytes, "checkpoint");
  in.expect_magic(kMagic);
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  json header;
  try {
    header = json::parse(in.bytes(in.u32()));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  const ModelConfig config = config_from(header.at("config"));
  const json& len = header.at("lengths");
  ModelParams p;
  p.flow = in.f32(len.at("flow").get<Index>());
  p.hypernet = in.f32(len.at("hypernet").get<Index>());
  p.encoder = in.f32(len.at("encoder").get<Index>());
  p.prior_potential = in.f32(len.at("prior_potential").get<Index>());
  if (!in.at_end()) throw FormatError("checkpoint: trailing bytes");
  return ProbNerfModel(config, std::move(p));
}

void save_checkpoint(const std::filesystem::path& path, const ProbNerfModel& model) {
  io::write_file(path, encode_checkpoint(model));
}

ProbNerfModel load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace probnerf
