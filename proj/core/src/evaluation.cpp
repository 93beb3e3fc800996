#include "probnerf/evaluation.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "probnerf/render.hpp"

namespace probnerf {

std::vector<Image> render_states(const ProbNerfModel& model, const std::vector<Vector>& states,
                                 bool latent_only, const Camera& camera) {
  std::vector<Image> out;
  for (const Vector& s : states) out.push_back(render_image(state_weights(model, s, latent_only), camera, model.scene()));
  return out;
}

EvalReport evaluate_samples(const ProbNerfModel& model, const SampleArchive& archive,
                            const std::vector<View>& views) {
  const auto start = std::chrono::steady_clock::now();
  if (archive.states.empty()) throw std::invalid_argument("evaluate_samples: archive has no states");
  if (archive.latent_dim != model.latent_dim() ||
      (!archive.latent_only() && archive.weight_dim != model.weight_dim())) {
    throw ShapeError("evaluate_samples: archive dimensions do not match the model");
  }
  EvalReport report;
  for (const View& v : views) {
    const std::vector<Image> renders = render_states(model, archive.states, archive.latent_only(), v.camera);
    ViewReport r;
    Image mean(v.image.width, v.image.height);
    double total = 0.0;
    for (const Image& img : renders) {
      const double p = psnr(img, v.image);
      r.infinite |= is_infinite_psnr(p);
      total += p;
      mean.pixels += img.pixels;
    }
    mean.pixels /= static_cast<double>(renders.size());
    r.mean_psnr = total / static_cast<double>(renders.size());
    r.psnr_of_mean = psnr(mean, v.image);
    r.mean_variance = renders.size() >= 2 ? per_pixel_variance(renders).mean : 0.0;
    report.views.push_back(r);
  }
  report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::json j;
  auto finite_or_string = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  j["views"] = nlohmann::json::array();
  for (const ViewReport& v : report.views) {
    j["views"].push_back({{"mean_psnr", finite_or_string(v.mean_psnr)},
                          {"psnr_of_mean", finite_or_string(v.psnr_of_mean)},
                          {"mean_variance", v.mean_variance},
                          {"infinite", v.infinite}});
  }
  j["chain_acceptance"] = report.chain_acceptance;
  j["runtime_s"] = report.runtime_s;
  return j.dump(2);
}

}  // namespace probnerf
