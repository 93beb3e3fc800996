#pragma once

// RealNVP prior over latent codes: two pairs of affine coupling layers with
// a fixed random permutation after each pair.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "probnerf/autodiff.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

struct FlowConfig {
  Index latent_dim = 16;
  Index hidden_width = 512;
  std::uint64_t permutation_seed = 0;
  // Log-scales are bound * tanh(raw).
  double log_scale_bound = 3.0;
};

class RealNvpFlow {
 public:
  static constexpr int kCouplings = 4;

  explicit RealNvpFlow(FlowConfig config);

  const FlowConfig& config() const { return config_; }
  Index parameter_count() const { return kCouplings * coupling_size(); }
  Index coupling_size() const;
  // Hidden layers drawn at random, output layers zero: every coupling starts
  // as the identity.
  Vector initialize(Rng& rng) const;

  // permutation(p)[i] is the source index of output coordinate i after pair p.
  const std::vector<Index>& permutation(int pair) const { return permutations_[static_cast<std::size_t>(pair)]; }

  struct Result {
    ad::Var value;
    ad::Var log_det;  // 1x1
  };

  Result forward(const ad::Var& params, const ad::Var& x) const;
  Result inverse(const ad::Var& params, const ad::Var& z) const;

  std::pair<Vector, double> forward(const Vector& params, const Vector& x) const;
  std::pair<Vector, double> inverse(const Vector& params, const Vector& z) const;

 private:
  struct Coupling {
    ad::Var shift;
    ad::Var log_scale;
  };
  Coupling coupling_net(const ad::Var& params, int layer, const ad::Var& conditioner) const;
  void check_input(const ad::Var& x) const;

  FlowConfig config_;
  std::array<std::vector<Index>, 2> permutations_;
  std::array<std::vector<Index>, 2> inverse_permutations_;
};

}  // namespace probnerf
