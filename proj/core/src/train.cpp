#include "probnerf/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "probnerf/checkpoint.hpp"
#include "probnerf/errors.hpp"
#include "probnerf/rng.hpp"

namespace probnerf {

using nlohmann::json;

Adam::Adam(Index size, Options options)
    : options_(options), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

void Adam::ascend(Vector& params, const Vector& gradient) { descend(params, -gradient); }

void Adam::descend(Vector& params, const Vector& g) {
  if (g.size() != m_.size() || params.size() != m_.size()) throw ShapeError("Adam: size mismatch");
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * g;
  v_ = b2 * v_ + (1.0 - b2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.learning_rate;
  if (lr == 0.0) return;
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + options_.epsilon);
}

std::string train_config_to_json(const TrainConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["iterations"] = c.iterations;
  j["learning_rate"] = c.adam.learning_rate;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["observation_scale"] = c.observation_scale;
  j["objects_per_batch"] = c.batch.objects;
  j["views_per_object"] = c.batch.views_per_object;
  j["rays_per_object"] = c.batch.rays_per_object;
  j["seed"] = c.seed;
  j["log_every"] = c.log_every;
  j["model"] = json::parse(model_config_to_json(c.model));
  return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  try {
    const json j = json::parse(text);
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("dataset", c.dataset);
    get("iterations", c.iterations);
    get("learning_rate", c.adam.learning_rate);
    get("beta1", c.adam.beta1);
    get("beta2", c.adam.beta2);
    get("epsilon", c.adam.epsilon);
    get("observation_scale", c.observation_scale);
    get("objects_per_batch", c.batch.objects);
    get("views_per_object", c.batch.views_per_object);
    get("rays_per_object", c.batch.rays_per_object);
    get("seed", c.seed);
    get("log_every", c.log_every);
    if (j.contains("model")) c.model = model_config_from_json(j["model"].dump());
    // Convenience keys mirrored onto the model configuration.
    if (j.contains("latent_dim")) c.model.latent_dim = j["latent_dim"].get<Index>();
    if (j.contains("grid_size")) {
      c.model.field.grid_size = c.model.scene.grid_size = j["grid_size"].get<int>();
    }
    if (j.contains("image_size")) c.model.encoder.image_size = j["image_size"].get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
  return c;
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, const ProbNerfModel& initial,
                  const TrainCallback& on_log) {
  if (dataset.entries.empty()) throw std::invalid_argument("train: dataset is empty");
  if (config.iterations < 0) throw std::invalid_argument("train: negative iteration count");
  TrainResult result{initial, {}};
  Vector params = pack_params(initial.params());
  Adam adam(params.size(), config.adam);
  const ElboOptions options{config.observation_scale, 1.0};
  const auto start = std::chrono::steady_clock::now();
  const int order = initial.config().field.encoding_order;

  for (int it = 1; it <= config.iterations; ++it) {
    const std::uint64_t step_seed = derive_seed(config.seed, static_cast<std::uint64_t>(it));
    const TrainBatch batch = make_train_batch(dataset, config.batch, initial.scene(), order, derive_seed(step_seed, 0));
    double elbo = 0.0;
    Vector grad;
    try {
      ad::Tape tape;
      ad::Var p = tape.variable(params);
      ad::Var value = elbo_estimate(result.model, p, batch, options, derive_seed(step_seed, 1));
      tape.backward(value);
      elbo = value.scalar();
      grad = tape.gradient(p);
    } catch (const NonFiniteError& e) {
      throw TrainingError(it, e.primitive(),
                          "training aborted at iteration " + std::to_string(it) + ": " + e.what());
    }
    if (!grad.allFinite()) {
      throw TrainingError(it, "gradient", "training aborted at iteration " + std::to_string(it) +
                                              ": non-finite ELBO gradient");
    }
    adam.ascend(params, grad);
    if (!params.allFinite()) {
      throw TrainingError(it, "adam", "training aborted at iteration " + std::to_string(it) +
                                          ": non-finite parameters after update");
    }
    result.model.set_params(unpack_params(result.model, params));
    if (config.log_every > 0 && (it % config.log_every == 0 || it == config.iterations)) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.log.push_back({it, elbo, wall});
      if (on_log) on_log(result.log.back());
    }
  }
  return result;
}

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,elbo,wall_time_s\n";
  out.precision(10);
  for (const TrainLogRow& r : log) out << r.iteration << ',' << r.elbo << ',' << r.wall_time_s << '\n';
}

}  // namespace probnerf
