#pragma once

#include <cstdint>
#include <random>

#include "probnerf/autodiff.hpp"

namespace probnerf {

// splitmix64 finalizer; decorrelates nearby seeds.
std::uint64_t mix_seed(std::uint64_t seed);
// Independent stream `stream` derived from `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  Vector normal_vector(Index n);
  std::uint64_t next_u64() { return engine_(); }
  Index uniform_index(Index n) { return static_cast<Index>(engine_() % static_cast<std::uint64_t>(n)); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace probnerf
