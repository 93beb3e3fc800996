#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "probnerf/hmc.hpp"

namespace probnerf {

struct SampleArchive {
  std::string method;  // "hmc", "hmc-latent-only", "vi", "prior"
  int n_chains = 0;
  int keep_last = 0;
  Index latent_dim = 0;
  Index weight_dim = 0;  // 0 for latent-only states
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> chain_seeds;
  AnnealingSchedule schedule;
  int n_leapfrog = 0;
  std::vector<int> sample_chain;  // provenance of each state
  std::vector<int> sample_step;
  std::vector<Vector> states;

  bool latent_only() const { return weight_dim == 0; }
  Index state_dim() const { return latent_dim + weight_dim; }
};

SampleArchive archive_from_chains(const ChainSet& set, Index latent_dim, Index weight_dim, std::string method);

// "PNRSAMPL", u32 version, u32 header length, JSON header, float32 states.
std::string encode_archive(const SampleArchive& archive);
SampleArchive decode_archive(const std::string& bytes);
void save_archive(const std::filesystem::path& path, const SampleArchive& archive);
SampleArchive load_archive(const std::filesystem::path& path);

// Columns: t,s_t,step_size,accept_rate,log_joint. accept_rate is the
// Metropolis acceptance probability of that iteration's proposal.
void write_chain_diagnostics(const std::filesystem::path& path, const ChainResult& chain);

}  // namespace probnerf
