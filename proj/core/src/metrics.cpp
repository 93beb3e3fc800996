#include "probnerf/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "probnerf/errors.hpp"

namespace probnerf {

namespace {
void check_same(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("image sizes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                     " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}
}  // namespace

double mse(const Image& a, const Image& b) {
  check_same(a, b);
  if (a.pixels.size() == 0) throw ShapeError("mse: empty images");
  return (a.pixels - b.pixels).squaredNorm() / static_cast<double>(a.pixels.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(m);
}

Image VarianceMap::to_image(double scale) const {
  Image img(width, height);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    img.pixels.col(i).setConstant(std::clamp(scale * values[i], 0.0, 1.0));
  }
  return img;
}

VarianceMap per_pixel_variance(const std::vector<Image>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("per_pixel_variance: need at least 2 samples");
  for (const Image& s : samples) check_same(samples.front(), s);
  const double n = static_cast<double>(samples.size());
  Eigen::Matrix3Xd mean = Eigen::Matrix3Xd::Zero(3, samples.front().pixels.cols());
  for (const Image& s : samples) mean += s.pixels;
  mean /= n;
  Eigen::Matrix3Xd ss = Eigen::Matrix3Xd::Zero(3, mean.cols());
  for (const Image& s : samples) ss.array() += (s.pixels - mean).array().square();
  VarianceMap v;
  v.width = samples.front().width;
  v.height = samples.front().height;
  v.values = (ss.colwise().sum() / (3.0 * (n - 1.0))).transpose();
  v.mean = v.values.size() ? v.values.mean() : 0.0;
  return v;
}

}  // namespace probnerf
