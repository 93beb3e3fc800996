#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "probnerf/model.hpp"

namespace probnerf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// JSON text for a model configuration and its inverse; missing keys keep
// their defaults.
std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

// Layout: "PNRFCKPT", u32 version, u32 header length, JSON header (config and
// array lengths), then flow, hypernet, encoder and prior-potential parameters
// as little-endian float32.
std::string encode_checkpoint(const ProbNerfModel& model);
ProbNerfModel decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ProbNerfModel& model);
ProbNerfModel load_checkpoint(const std::filesystem::path& path);

// Rounds every parameter through float32, matching what a save/load cycle
// produces.
ModelParams round_to_float(const ModelParams& params);

}  // namespace probnerf
