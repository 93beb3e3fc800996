#pragma once

#include <vector>

#include "probnerf/archive.hpp"
#include "probnerf/dataset.hpp"
#include "probnerf/metrics.hpp"
#include "probnerf/model.hpp"

namespace probnerf {

std::vector<Image> render_states(const ProbNerfModel& model, const std::vector<Vector>& states,
                                 bool latent_only, const Camera& camera);

struct ViewReport {
  double mean_psnr = 0.0;        // mean over samples of per-sample PSNR
  double psnr_of_mean = 0.0;     // PSNR of the sample-mean image
  double mean_variance = 0.0;    // mean per-pixel variance across samples
  bool infinite = false;         // some sample matched exactly
};

struct EvalReport {
  std::vector<ViewReport> views;
  std::vector<double> chain_acceptance;
  double runtime_s = 0.0;
};

EvalReport evaluate_samples(const ProbNerfModel& model, const SampleArchive& archive,
                            const std::vector<View>& views);

std::string eval_report_to_json(const EvalReport& report);

}  // namespace probnerf
