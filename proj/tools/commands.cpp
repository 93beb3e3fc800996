#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "options.hpp"
#include "probnerf/ablation.hpp"
#include "probnerf/archive.hpp"
#include "probnerf/checkpoint.hpp"
#include "probnerf/dataset.hpp"
#include "probnerf/evaluation.hpp"
#include "probnerf/hmc.hpp"
#include "probnerf/metrics.hpp"
#include "probnerf/train.hpp"
#include "probnerf/vi.hpp"

namespace probnerf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return stem + "_" + buf + ext;
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad index '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

PixelRegion parse_region(const std::string& crop, int width, int height) {
  if (crop == "full") return PixelRegion::full(width, height);
  if (crop == "left") return PixelRegion::left_half(width, height);
  if (crop == "right") return PixelRegion::right_half(width, height);
  throw UsageError("--crop must be full, left or right, got '" + crop + "'");
}

CameraRig make_rig(double radius, double fov_degrees, int size) {
  return CameraRig{radius, fov_degrees * std::numbers::pi / 180.0, size, size};
}

// Conditioning data: chosen views of one dataset object, optionally cropped.
struct ObservationFlags {
  std::string dataset;
  int object = 0;
  std::string views = "0";
  std::string crop = "full";

  void add(Options& o) {
    o.add("dataset", dataset, "Dataset directory written by make-data")->required();
    o.add("object", object, "Object index within the dataset");
    o.add("views", views, "Comma-separated view indices to condition on");
    o.add("crop", crop, "Pixel region of each view: full, left or right");
  }

  struct Loaded {
    Dataset dataset;
    Observation observation;
    std::vector<int> conditioned;
  };

  Loaded load() const {
    Loaded l;
    l.dataset = load_dataset(dataset);
    if (object < 0 || object >= static_cast<int>(l.dataset.entries.size())) {
      throw UsageError("--object " + std::to_string(object) + " outside [0, " +
                       std::to_string(l.dataset.entries.size()) + ")");
    }
    const DatasetEntry& e = l.dataset.entries[static_cast<std::size_t>(object)];
    l.conditioned = parse_index_list(views);
    if (l.conditioned.empty()) throw UsageError("--views lists no views");
    std::vector<Observation> parts;
    for (int v : l.conditioned) {
      if (v < 0 || v >= static_cast<int>(e.views.size())) throw UsageError("view index " + std::to_string(v) + " out of range");
      const View& view = e.views[static_cast<std::size_t>(v)];
      parts.push_back(crop_view(view.image, view.camera, parse_region(crop, view.image.width, view.image.height)));
    }
    l.observation = concat_observations(parts);
    return l;
  }
};

struct ScheduleFlags {
  AnnealingSchedule schedule;
  int chains = 8;
  int leapfrog = 100;
  int keep_last = 16;
  unsigned threads = 0;

  void add(Options& o) {
    o.add("steps", schedule.steps, "HMC iterations T");
    o.add("s0", schedule.s0, "Initial observation noise scale");
    o.add("sT", schedule.sT, "Final observation noise scale");
    o.add("base-step", schedule.base_step, "Leapfrog step size at s0");
    o.add("chains", chains, "Number of independent chains");
    o.add("leapfrog", leapfrog, "Leapfrog steps per HMC iteration");
    o.add("keep-last", keep_last, "Final iterates kept per chain");
    o.add("threads", threads, "Worker threads (0 = hardware concurrency)");
  }

  HmcConfig config(std::uint64_t seed) const {
    HmcConfig c;
    c.schedule = schedule;
    c.n_chains = chains;
    c.n_leapfrog = leapfrog;
    c.keep_last = keep_last;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_samples_and_diagnostics(const fs::path& out, const ChainSet& set, const SampleArchive& archive,
                                   double runtime) {
  save_archive(out / "samples.bin", archive);
  json summary;
  summary["method"] = archive.method;
  summary["runtime_s"] = runtime;
  fs::create_directories(out / "chains");
  for (std::size_t c = 0; c < set.chains.size(); ++c) {
    const ChainResult& chain = set.chains[c];
    write_chain_diagnostics(out / "chains" / numbered("chain", c, ".csv"), chain);
    summary["chains"].push_back({{"seed", chain.seed},
                                 {"acceptance_rate", chain.proposals ? double(chain.accepted) / chain.proposals : 0.0},
                                 {"divergences", chain.divergences},
                                 {"gradient_evaluations", chain.gradient_evaluations},
                                 {"final_log_joint", chain.final_log_joint}});
  }
  write_text(out / "summary.json", summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

Command make_data(CLI::App& parent) {
  auto* app = parent.add_subcommand("make-data", "Generate a synthetic voxel dataset");
  auto o = std::make_shared<Options>(app);
  auto spec = std::make_shared<DatasetSpec>();
  auto out = std::make_shared<std::string>();
  auto mode = std::make_shared<std::string>("uniform-random");
  auto grid = std::make_shared<int>(spec->scene.grid_size);
  o->register_config();
  o->add("out", *out, "Output dataset directory")->required();
  o->add("objects", spec->n_objects, "Number of objects");
  o->add("views", spec->views_per_object, "Views per object");
  o->add("image-size", spec->image_size, "Square image side in pixels");
  o->add("seed", spec->seed, "Dataset seed");
  o->add("family", spec->family, "box-stack, two-limb, random-blobs or mixed");
  o->add("camera-mode", *mode, "uniform-random or equally-spaced");
  o->add("radius", spec->radius, "Camera circle radius");
  o->add("fov", spec->fov_degrees, "Vertical field of view in degrees");
  o->add("grid-size", *grid, "Voxel lattice resolution");
  return {app, [=] {
            const json settings = o->resolve();
            try {
              spec->camera_mode = parse_camera_mode(*mode);
              if (spec->family != "mixed") parse_family(spec->family);
            } catch (const std::invalid_argument& e) {
              throw UsageError(e.what());
            }
            spec->scene.grid_size = *grid;
            write_run_record(*out, "make-data", settings, spec->seed, o->config_path());
            const auto start = std::chrono::steady_clock::now();
            const Dataset d = build_dataset(*spec, *out);
            std::cout << "wrote " << d.entries.size() << " objects x " << spec->views_per_object << " views to "
                      << *out << " in " << seconds_since(start) << " s\n";
          }};
}

Command train_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("train", "Train the generative model by maximizing the ELBO");
  struct Flags {
    std::string config, out, dataset;
    int iterations = 0, objects = 0, views = 0, rays = 0, latent_dim = 0, grid_size = 0, image_size = 0, log_every = 0;
    double lr = 0.0, s = 0.0;
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<Flags>();
  app->add_option("--config", f->config, "Training config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--out", f->out, "Run directory")->required();
  auto* dataset = app->add_option("--dataset", f->dataset, "Dataset directory");
  auto* iterations = app->add_option("--iterations", f->iterations, "Adam iterations");
  auto* lr = app->add_option("--learning-rate", f->lr, "Adam step size");
  auto* s = app->add_option("--observation-scale", f->s, "Observation noise scale s");
  auto* objects = app->add_option("--objects-per-batch", f->objects, "Objects per minibatch");
  auto* views = app->add_option("--views-per-object", f->views, "Views per object in a minibatch");
  auto* rays = app->add_option("--rays-per-object", f->rays, "Ray subsample per object");
  auto* latent = app->add_option("--latent-dim", f->latent_dim, "Latent dimension K");
  auto* grid = app->add_option("--grid-size", f->grid_size, "Lattice resolution G");
  auto* image = app->add_option("--image-size", f->image_size, "Encoder image size");
  auto* log_every = app->add_option("--log-every", f->log_every, "Log interval in iterations");
  auto* seed = app->add_option("--seed", f->seed, "Training seed");
  return {app, [=] {
            TrainConfig tc;
            if (!f->config.empty()) {
              try {
                tc = train_config_from_json(read_text(f->config));
              } catch (const FormatError& e) {
                throw UsageError(e.what());
              }
            }
            if (dataset->count()) tc.dataset = f->dataset;
            if (iterations->count()) tc.iterations = f->iterations;
            if (lr->count()) tc.adam.learning_rate = f->lr;
            if (s->count()) tc.observation_scale = f->s;
            if (objects->count()) tc.batch.objects = f->objects;
            if (views->count()) tc.batch.views_per_object = f->views;
            if (rays->count()) tc.batch.rays_per_object = f->rays;
            if (latent->count()) tc.model.latent_dim = f->latent_dim;
            if (grid->count()) tc.model.field.grid_size = tc.model.scene.grid_size = f->grid_size;
            if (image->count()) tc.model.encoder.image_size = f->image_size;
            if (log_every->count()) tc.log_every = f->log_every;
            if (seed->count()) tc.seed = f->seed;
            if (tc.dataset.empty()) throw UsageError("train: no dataset given (--dataset or config key 'dataset')");
            tc.model.observation_scale = tc.observation_scale;
            const Dataset data = load_dataset(tc.dataset);
            if (data.spec.image_size != tc.model.encoder.image_size) {
              throw UsageError("train: dataset images are " + std::to_string(data.spec.image_size) +
                               " pixels but the encoder expects " + std::to_string(tc.model.encoder.image_size));
            }
            const fs::path out = f->out;
            write_run_record(out, "train", json::parse(train_config_to_json(tc)), tc.seed, f->config);
            write_text(out / "train_config.json", train_config_to_json(tc) + "\n");
            const ProbNerfModel initial = ProbNerfModel::initialize(tc.model, derive_seed(tc.seed, 0xC0FFEE));
            const TrainResult r = train(tc, data, initial, [](const TrainLogRow& row) {
              std::cout << "iter " << row.iteration << " elbo " << row.elbo << " t " << row.wall_time_s << "s\n";
            });
            write_train_log(out / "train_log.csv", r.log);
            save_checkpoint(out / "model.ckpt", r.model);
            std::cout << "checkpoint: " << (out / "model.ckpt").string() << "\n";
          }};
}

Command sample_prior_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("sample-prior", "Draw objects from the generative model and render them");
  auto o = std::make_shared<Options>(app);
  struct Flags {
    std::string checkpoint, out;
    int n = 16, image_size = 32;
    double azimuth = 0.0, radius = 3.0, fov = 60.0;
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<Flags>();
  o->register_config();
  o->add("checkpoint", f->checkpoint, "Model checkpoint")->required();
  o->add("out", f->out, "Run directory")->required();
  o->add("n", f->n, "Number of draws");
  o->add("seed", f->seed, "Sampling seed");
  o->add("azimuth", f->azimuth, "Render azimuth in radians");
  o->add("image-size", f->image_size, "Rendered image size");
  o->add("radius", f->radius, "Camera distance");
  o->add("fov", f->fov, "Vertical field of view in degrees");
  return {app, [=] {
            const json settings = o->resolve();
            if (f->n < 1) throw UsageError("--n must be positive");
            const fs::path out = f->out;
            write_run_record(out, "sample-prior", settings, f->seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(f->checkpoint);
            const Camera cam = camera_at_azimuth(f->azimuth, make_rig(f->radius, f->fov, f->image_size));
            SampleArchive archive;
            archive.method = "prior";
            archive.n_chains = 1;
            archive.keep_last = f->n;
            archive.latent_dim = model.latent_dim();
            archive.weight_dim = model.weight_dim();
            archive.seed = f->seed;
            for (int i = 0; i < f->n; ++i) {
              const auto [state, weights] = sample_prior(model, derive_seed(f->seed, static_cast<std::uint64_t>(i)));
              archive.states.push_back(state.flat());
              archive.sample_chain.push_back(0);
              archive.sample_step.push_back(i);
              write_ppm(out / numbered("prior", static_cast<std::size_t>(i), ".ppm"),
                        render_image(weights, cam, model.scene()));
            }
            save_archive(out / "samples.bin", archive);
            std::cout << "wrote " << f->n << " prior draws to " << out.string() << "\n";
          }};
}

Command hmc_command(CLI::App& parent, bool latent_only) {
  auto* app = parent.add_subcommand(latent_only ? "infer-latent-only" : "infer-hmc",
                                    latent_only ? "Annealed HMC over the latent code only"
                                                : "Annealed HMC over the latent code and weight perturbation");
  auto o = std::make_shared<Options>(app);
  auto obs = std::make_shared<ObservationFlags>();
  auto sched = std::make_shared<ScheduleFlags>();
  auto checkpoint = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  o->register_config();
  o->add("checkpoint", *checkpoint, "Model checkpoint")->required();
  o->add("out", *out, "Run directory")->required();
  o->add("seed", *seed, "Chain seed");
  obs->add(*o);
  sched->add(*o);
  const std::string name = latent_only ? "infer-latent-only" : "infer-hmc";
  return {app, [=] {
            const json settings = o->resolve();
            const fs::path dir = *out;
            write_run_record(dir, name, settings, *seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(*checkpoint);
            const auto loaded = obs->load();
            const HmcConfig cfg = sched->config(*seed);
            const auto start = std::chrono::steady_clock::now();
            const ChainSet set = latent_only ? run_latent_only_chains(model, loaded.observation, cfg)
                                             : run_annealed_chains(model, loaded.observation, cfg);
            const double runtime = seconds_since(start);
            const SampleArchive archive = archive_from_chains(set, model.latent_dim(), latent_only ? 0 : model.weight_dim(),
                                                              latent_only ? "hmc-latent-only" : "hmc");
            write_samples_and_diagnostics(dir, set, archive, runtime);
            std::cout << name << ": " << archive.states.size() << " samples in " << runtime << " s\n";
          }};
}

Command vi_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("infer-vi", "Mean-field variational inference over the latent state");
  auto o = std::make_shared<Options>(app);
  auto obs = std::make_shared<ObservationFlags>();
  auto vc = std::make_shared<ViConfig>();
  auto checkpoint = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto n_samples = std::make_shared<int>(16);
  auto plain = std::make_shared<bool>(false);
  o->register_config();
  o->add("checkpoint", *checkpoint, "Model checkpoint")->required();
  o->add("out", *out, "Run directory")->required();
  o->add("seed", vc->seed, "Optimization and sampling seed");
  o->add("vi-steps", vc->steps, "Gradient steps");
  o->add("learning-rate", vc->learning_rate, "Adam step size");
  o->add("observation-scale", vc->observation_scale, "Observation noise scale s of the target");
  o->add("initial-log-sigma", vc->initial_log_sigma, "Starting log scale of every coordinate");
  o->add("n-samples", *n_samples, "Samples drawn from the fitted approximation");
  o->flag("plain-gradient", *plain, "Use the full reparameterization gradient instead of sticking the landing");
  obs->add(*o);
  return {app, [=] {
            const json settings = o->resolve();
            const fs::path dir = *out;
            write_run_record(dir, "infer-vi", settings, vc->seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(*checkpoint);
            const auto loaded = obs->load();
            const FoamTarget target(model, loaded.observation);
            ViConfig cfg = *vc;
            cfg.sticking_the_landing = !*plain;
            ViTrace trace;
            const auto start = std::chrono::steady_clock::now();
            const VIParams params = fit_vi(target, cfg, &trace);
            const double runtime = seconds_since(start);
            SampleArchive archive;
            archive.method = "vi";
            archive.n_chains = 1;
            archive.keep_last = *n_samples;
            archive.latent_dim = model.latent_dim();
            archive.weight_dim = model.weight_dim();
            archive.seed = cfg.seed;
            archive.states = sample_vi(params, *n_samples, derive_seed(cfg.seed, 1));
            for (int i = 0; i < *n_samples; ++i) {
              archive.sample_chain.push_back(0);
              archive.sample_step.push_back(i);
            }
            save_archive(dir / "samples.bin", archive);
            std::ofstream csv(dir / "vi_trace.csv");
            csv << "step,elbo\n";
            csv.precision(10);
            for (std::size_t i = 0; i < trace.elbo.size(); ++i) csv << i + 1 << ',' << trace.elbo[i] << '\n';
            json summary{{"method", "vi"}, {"runtime_s", runtime},
                         {"final_elbo", trace.elbo.empty() ? 0.0 : trace.elbo.back()},
                         {"mean_sigma", params.log_sigma.array().exp().mean()}};
            write_text(dir / "summary.json", summary.dump(2) + "\n");
            std::cout << "infer-vi: " << *n_samples << " samples in " << runtime << " s\n";
          }};
}

Command render_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("render", "Render archived samples from a camera on the circle");
  auto o = std::make_shared<Options>(app);
  struct Flags {
    std::string checkpoint, samples, out, renderer = "foam";
    double azimuth = 0.0, radius = 3.0, fov = 60.0;
    int image_size = 32, quadrature_samples = 64;
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<Flags>();
  o->register_config();
  o->add("checkpoint", f->checkpoint, "Model checkpoint")->required();
  o->add("samples", f->samples, "Sample archive (samples.bin)")->required();
  o->add("out", f->out, "Run directory")->required();
  o->add("azimuth", f->azimuth, "Camera azimuth in radians");
  o->add("radius", f->radius, "Camera distance");
  o->add("fov", f->fov, "Vertical field of view in degrees");
  o->add("image-size", f->image_size, "Image size in pixels");
  o->add("renderer", f->renderer, "foam or quadrature");
  o->add("quadrature-samples", f->quadrature_samples, "Samples per ray for the quadrature renderer");
  o->add("seed", f->seed, "Quadrature jitter seed");
  return {app, [=] {
            const json settings = o->resolve();
            RendererChoice choice;
            if (f->renderer == "quadrature") {
              choice.kind = RendererKind::kQuadrature;
              choice.n_samples = f->quadrature_samples;
              choice.seed = f->seed;
            } else if (f->renderer != "foam") {
              throw UsageError("--renderer must be foam or quadrature");
            }
            const fs::path dir = f->out;
            write_run_record(dir, "render", settings, f->seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(f->checkpoint);
            const SampleArchive archive = load_archive(f->samples);
            if (archive.latent_dim != model.latent_dim() ||
                (!archive.latent_only() && archive.weight_dim != model.weight_dim())) {
              throw ShapeError("render: sample archive does not match the checkpoint");
            }
            const Camera cam = camera_at_azimuth(f->azimuth, make_rig(f->radius, f->fov, f->image_size));
            std::vector<Image> images;
            for (std::size_t i = 0; i < archive.states.size(); ++i) {
              images.push_back(render_image(state_weights(model, archive.states[i], archive.latent_only()), cam,
                                            model.scene(), choice));
              write_ppm(dir / numbered("sample", i, ".ppm"), images.back());
            }
            Image mean = images.front();
            for (std::size_t i = 1; i < images.size(); ++i) mean.pixels += images[i].pixels;
            mean.pixels /= static_cast<double>(images.size());
            write_ppm(dir / "mean.ppm", mean);
            json stats{{"samples", images.size()}};
            if (images.size() >= 2) {
              const VarianceMap var = per_pixel_variance(images);
              const double peak = var.values.maxCoeff();
              write_ppm(dir / "variance.ppm", var.to_image(peak > 0 ? 1.0 / peak : 1.0));
              stats["mean_variance"] = var.mean;
            }
            write_text(dir / "stats.json", stats.dump(2) + "\n");
            std::cout << "rendered " << images.size() << " samples to " << dir.string() << "\n";
          }};
}

Command eval_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("eval", "PSNR and per-pixel variance of samples against dataset views");
  auto o = std::make_shared<Options>(app);
  struct Flags {
    std::string checkpoint, samples, dataset, views, out;
    int object = 0;
  };
  auto f = std::make_shared<Flags>();
  o->register_config();
  o->add("checkpoint", f->checkpoint, "Model checkpoint")->required();
  o->add("samples", f->samples, "Sample archive (samples.bin)")->required();
  o->add("dataset", f->dataset, "Dataset directory")->required();
  o->add("object", f->object, "Object index");
  o->add("views", f->views, "Comma-separated view indices (default: all)");
  o->add("out", f->out, "Run directory")->required();
  return {app, [=] {
            const json settings = o->resolve();
            const fs::path dir = f->out;
            const SampleArchive archive = load_archive(f->samples);
            write_run_record(dir, "eval", settings, archive.seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(f->checkpoint);
            const Dataset data = load_dataset(f->dataset);
            if (f->object < 0 || f->object >= static_cast<int>(data.entries.size())) throw UsageError("--object out of range");
            const DatasetEntry& e = data.entries[static_cast<std::size_t>(f->object)];
            std::vector<View> views;
            const std::vector<int> wanted = parse_index_list(f->views);
            if (wanted.empty()) {
              views = e.views;
            } else {
              for (int v : wanted) {
                if (v < 0 || v >= static_cast<int>(e.views.size())) throw UsageError("view " + std::to_string(v) + " out of range");
                views.push_back(e.views[static_cast<std::size_t>(v)]);
              }
            }
            EvalReport report = evaluate_samples(model, archive, views);
            const fs::path summary = fs::path(f->samples).parent_path() / "summary.json";
            if (fs::exists(summary)) {
              const json s = json::parse(read_text(summary));
              if (s.contains("chains")) {
                for (const auto& c : s["chains"]) report.chain_acceptance.push_back(c["acceptance_rate"].get<double>());
              }
            }
            write_text(dir / "eval.json", eval_report_to_json(report) + "\n");
            for (std::size_t i = 0; i < report.views.size(); ++i) {
              const ViewReport& v = report.views[i];
              std::cout << "view " << (wanted.empty() ? static_cast<int>(i) : wanted[i]) << ": psnr "
                        << (v.infinite ? std::string("inf") : std::to_string(v.mean_psnr)) << " dB, variance "
                        << v.mean_variance << "\n";
            }
          }};
}

Command ablate_renderer_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("ablate-renderer", "HMC acceptance under the foam and quadrature renderers");
  auto o = std::make_shared<Options>(app);
  auto cfg = std::make_shared<RendererAblationConfig>();
  struct Flags {
    std::string checkpoint, out;
    double lo = 1e-5, hi = 1e-1, fov = 60.0;
    int n = 9, image_size = 16;
  };
  auto f = std::make_shared<Flags>();
  o->register_config();
  o->add("checkpoint", f->checkpoint, "Model checkpoint")->required();
  o->add("out", f->out, "Run directory")->required();
  o->add("step-min", f->lo, "Smallest step size of the sweep");
  o->add("step-max", f->hi, "Largest step size of the sweep");
  o->add("step-count", f->n, "Number of log-spaced step sizes");
  o->add("chains", cfg->n_chains, "Chains per setting");
  o->add("leapfrog", cfg->n_leapfrog, "Leapfrog steps per iteration");
  o->add("iterations", cfg->iterations, "HMC iterations per setting");
  o->add("observation-scale", cfg->observation_scale, "Observation noise scale s");
  o->add("quadrature-samples", cfg->quadrature_samples, "Samples per ray for the quadrature renderer");
  o->add("image-size", f->image_size, "Rendered view size");
  o->add("fov", f->fov, "Vertical field of view in degrees");
  o->add("azimuth", cfg->azimuth, "View azimuth in radians");
  o->add("seed", cfg->seed, "Ablation seed");
  o->add("threads", cfg->threads, "Worker threads (0 = hardware concurrency)");
  return {app, [=] {
            const json settings = o->resolve();
            const fs::path dir = f->out;
            write_run_record(dir, "ablate-renderer", settings, cfg->seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(f->checkpoint);
            RendererAblationConfig c = *cfg;
            c.step_sizes = log_sweep(f->lo, f->hi, f->n);
            c.rig = make_rig(c.rig.radius, f->fov, f->image_size);
            const auto rows = ablate_renderer(model, c);
            write_acceptance_csv(dir / "acceptance.csv", rows);
            for (const AcceptanceRow& r : rows) {
              std::cout << r.renderer << " step " << r.step_size << " acceptance " << r.acceptance << "\n";
            }
          }};
}

Command ablate_annealing_command(CLI::App& parent) {
  auto* app = parent.add_subcommand("ablate-annealing", "Annealed versus fixed-temperature HMC");
  auto o = std::make_shared<Options>(app);
  auto obs = std::make_shared<ObservationFlags>();
  auto sched = std::make_shared<ScheduleFlags>();
  auto checkpoint = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto fixed_step = std::make_shared<double>(AnnealingAblationConfig{}.fixed_step);
  o->register_config();
  o->add("checkpoint", *checkpoint, "Model checkpoint")->required();
  o->add("out", *out, "Run directory")->required();
  o->add("seed", *seed, "Chain seed shared by both variants");
  o->add("fixed-step", *fixed_step, "Step size of the fixed-temperature variant");
  obs->add(*o);
  sched->add(*o);
  return {app, [=] {
            const json settings = o->resolve();
            const fs::path dir = *out;
            write_run_record(dir, "ablate-annealing", settings, *seed, o->config_path());
            const ProbNerfModel model = load_checkpoint(*checkpoint);
            const auto loaded = obs->load();
            AnnealingAblationConfig cfg;
            cfg.hmc = sched->config(*seed);
            cfg.hmc.keep_last = 1;
            cfg.fixed_step = *fixed_step;
            const AnnealingAblationReport r = ablate_annealing(model, loaded.observation, cfg);
            write_annealing_csv(dir / "annealing.csv", r);
            json report{{"annealed_spread", r.annealed_spread}, {"fixed_spread", r.fixed_spread},
                        {"annealed_mse", r.annealed_mse}, {"fixed_mse", r.fixed_mse}};
            write_text(dir / "report.json", report.dump(2) + "\n");
            std::cout << "across-chain MSE spread: annealed " << r.annealed_spread << ", fixed " << r.fixed_spread << "\n";
          }};
}

}  // namespace

std::vector<Command> register_commands(CLI::App& app) {
  return {make_data(app),
          train_command(app),
          sample_prior_command(app),
          hmc_command(app, false),
          vi_command(app),
          hmc_command(app, true),
          render_command(app),
          eval_command(app),
          ablate_renderer_command(app),
          ablate_annealing_command(app)};
}

}  // namespace probnerf::cli
