#pragma once

#include <cstdint>
#include <vector>

#include "probnerf/dataset.hpp"
#include "probnerf/model.hpp"

namespace probnerf {

struct TrainObject {
  std::vector<Image> images;
  std::vector<Camera> cameras;
  PreparedObservation rays;  // random subsample of the views' pixels
  Index total_rays = 0;      // pixel count across the selected views
};

struct TrainBatch {
  std::vector<TrainObject> objects;
};

struct BatchSpec {
  int objects = 8;
  int views_per_object = 10;
  int rays_per_object = 1024;
};

// Objects drawn uniformly, views without replacement per object, rays without
// replacement from the pooled pixels of the chosen views.
TrainBatch make_train_batch(const Dataset& dataset, const BatchSpec& spec, const FoamScene& scene,
                            int encoding_order, std::uint64_t seed);

// Flat layout of all trainable parameters: [flow; hypernet; encoder; prior potential].
Vector pack_params(const ModelParams& params);
ModelParams unpack_params(const ProbNerfModel& model, const Vector& flat);

struct ElboOptions {
  double observation_scale = 0.1;
  double likelihood_weight = 1.0;
};

// Single-sample ELBO averaged over the batch objects. `params` is the packed
// parameter vector; the model supplies architecture only.
ad::Var elbo_estimate(const ProbNerfModel& model, const ad::Var& params, const TrainBatch& batch,
                      const ElboOptions& options, std::uint64_t seed);
double elbo_estimate(const ProbNerfModel& model, const TrainBatch& batch, const ElboOptions& options,
                     std::uint64_t seed);

// Latent posterior approximation for a set of views: pooled encoder potential.
GaussianPotential encode_views(const ProbNerfModel& model, const std::vector<Image>& images,
                               const std::vector<Camera>& cameras);

}  // namespace probnerf
