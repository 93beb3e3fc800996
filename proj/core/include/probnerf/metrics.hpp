#pragma once

#include <limits>
#include <vector>

#include "probnerf/image.hpp"

namespace probnerf {

// Mean squared error over all pixels and channels.
double mse(const Image& a, const Image& b);

// 10 log10(1 / MSE); +infinity when the images are identical.
double psnr(const Image& a, const Image& b);
inline bool is_infinite_psnr(double value) { return value == std::numeric_limits<double>::infinity(); }

struct VarianceMap {
  int width = 0;
  int height = 0;
  Eigen::VectorXd values;  // per pixel, averaged over channels
  double mean = 0.0;

  Image to_image(double scale = 1.0) const;
};

// Unbiased per-pixel sample variance across images.
VarianceMap per_pixel_variance(const std::vector<Image>& samples);

}  // namespace probnerf
