#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "probnerf/dataset.hpp"
#include "probnerf/model.hpp"
#include "probnerf/vae.hpp"

namespace probnerf {

// Adaptive-moment optimizer; `ascend` moves along the gradient.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(Index size, Options options);
  void ascend(Vector& params, const Vector& gradient);
  void descend(Vector& params, const Vector& gradient);
  long steps() const { return t_; }

 private:
  Options options_;
  Vector m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  std::string dataset;
  int iterations = 2000;
  Adam::Options adam;
  double observation_scale = 0.1;
  BatchSpec batch{8, 10, 1024};
  std::uint64_t seed = 0;
  int log_every = 10;
  ModelConfig model;
};

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);

struct TrainLogRow {
  int iteration = 0;
  double elbo = 0.0;
  double wall_time_s = 0.0;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(int iteration, std::string term, const std::string& what)
      : std::runtime_error(what), iteration_(iteration), term_(std::move(term)) {}
  int iteration() const { return iteration_; }
  const std::string& term() const { return term_; }

 private:
  int iteration_;
  std::string term_;
};

struct TrainResult {
  ProbNerfModel model;
  std::vector<TrainLogRow> log;
};

using TrainCallback = std::function<void(const TrainLogRow&)>;

// Gradient ascent on the ELBO over flow, hypernetwork, encoder and prior
// potential. Starts from `initial` (typically ProbNerfModel::initialize).
TrainResult train(const TrainConfig& config, const Dataset& dataset, const ProbNerfModel& initial,
                  const TrainCallback& on_log = {});

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log);

}  // namespace probnerf
