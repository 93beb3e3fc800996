#include "probnerf/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

namespace probnerf {

std::vector<double> log_sweep(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("log_sweep: need 0 < lo <= hi, n >= 1");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(std::exp((1.0 - f) * std::log(lo) + f * std::log(hi)));
  }
  out.front() = lo;
  out.back() = n == 1 ? lo : hi;
  return out;
}

double observation_mse(const ProbNerfModel& model, const Vector& state, bool latent_only, const Observation& obs) {
  const Eigen::Matrix3Xd rendered = render_rays(state_weights(model, state, latent_only), obs.rays, model.scene());
  return (rendered - obs.pixels).squaredNorm() / static_cast<double>(obs.pixels.size());
}

double standard_deviation(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<AcceptanceRow> ablate_renderer(const ProbNerfModel& model, const RendererAblationConfig& config) {
  const auto [state, weights] = sample_prior(model, derive_seed(config.seed, 0));
  const Vector start = state.flat();
  const Camera camera = camera_at_azimuth(config.azimuth, config.rig);
  const std::vector<Ray> rays = generate_rays(camera);

  std::vector<AcceptanceRow> rows;
  for (const char* renderer : {"foam", "quadrature"}) {
    const bool quad = std::string(renderer) == "quadrature";
    RendererChoice choice;
    if (quad) choice = {RendererKind::kQuadrature, config.quadrature_samples, derive_seed(config.seed, 1)};
    Observation obs{rays, render_rays(weights, rays, model.scene(), choice)};
    std::unique_ptr<TemperedTarget> target;
    if (quad) {
      target = std::make_unique<QuadratureTarget>(model, obs, config.quadrature_samples);
    } else {
      target = std::make_unique<FoamTarget>(model, obs);
    }
    for (double step : config.step_sizes) {
      HmcConfig hmc;
      hmc.schedule = {config.observation_scale, config.observation_scale, config.iterations, step};
      hmc.n_chains = config.n_chains;
      hmc.n_leapfrog = config.n_leapfrog;
      hmc.keep_last = 1;
      hmc.seed = derive_seed(config.seed, 2);
      hmc.anneal = false;
      hmc.fixed_step = step;
      hmc.threads = config.threads;
      const std::vector<Vector> initial(static_cast<std::size_t>(config.n_chains), start);
      ChainSet set;
      try {
        set = run_chains(*target, hmc, initial);
      } catch (const InferenceError&) {
        rows.push_back({renderer, step, 0.0});
        continue;
      }
      double acc = 0.0;
      for (const ChainResult& c : set.chains) acc += c.diagnostics.back().accept_prob;
      rows.push_back({renderer, step, acc / static_cast<double>(set.chains.size())});
    }
  }
  return rows;
}

void write_acceptance_csv(const std::filesystem::path& path, const std::vector<AcceptanceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  out << "renderer,step_size,acceptance\n";
  for (const AcceptanceRow& r : rows) out << r.renderer << ',' << r.step_size << ',' << r.acceptance << '\n';
}

AnnealingAblationReport ablate_annealing(const ProbNerfModel& model, const Observation& obs,
                                         const AnnealingAblationConfig& config) {
  const FoamTarget target(model, obs);
  HmcConfig annealed = config.hmc;
  annealed.anneal = true;
  annealed.keep_last = 1;
  HmcConfig fixed = annealed;
  fixed.anneal = false;
  fixed.fixed_step = config.fixed_step;

  AnnealingAblationReport report;
  const ChainSet a = run_chains(target, annealed);
  const ChainSet f = run_chains(target, fixed);
  for (const ChainResult& c : a.chains) report.annealed_mse.push_back(observation_mse(model, c.samples.back(), false, obs));
  for (const ChainResult& c : f.chains) report.fixed_mse.push_back(observation_mse(model, c.samples.back(), false, obs));
  report.annealed_spread = standard_deviation(report.annealed_mse);
  report.fixed_spread = standard_deviation(report.fixed_mse);
  return report;
}

void write_annealing_csv(const std::filesystem::path& path, const AnnealingAblationReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  out << "chain,annealed_mse,fixed_mse\n";
  for (std::size_t c = 0; c < report.annealed_mse.size(); ++c) {
    out << c << ',' << report.annealed_mse[c] << ',' << (c < report.fixed_mse.size() ? report.fixed_mse[c] : 0.0) << '\n';
  }
}

}  // namespace probnerf
