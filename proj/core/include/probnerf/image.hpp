#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace probnerf {

// RGB image; pixel (row, col) is column row * width + col of `pixels`.
struct Image {
  int width = 0;
  int height = 0;
  Eigen::Matrix3Xd pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(Eigen::Matrix3Xd::Zero(3, w * h)) {}

  static Image filled(int w, int h, const Eigen::Vector3d& color);

  Eigen::Index index(int row, int col) const { return static_cast<Eigen::Index>(row) * width + col; }
  Eigen::Vector3d at(int row, int col) const { return pixels.col(index(row, col)); }
  void set(int row, int col, const Eigen::Vector3d& c) { pixels.col(index(row, col)) = c; }
};

// 8-bit value of a channel: round(255 * clamp(c, 0, 1)).
unsigned char quantize_channel(double c);

// Binary PPM (P6, maxval 255).
std::string encode_ppm(const Image& image);
Image decode_ppm(const std::string& bytes);
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

}  // namespace probnerf
