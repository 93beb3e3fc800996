#include "probnerf/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "probnerf/errors.hpp"

namespace probnerf {

Image Image::filled(int w, int h, const Eigen::Vector3d& color) {
  Image img(w, h);
  img.pixels.colwise() = color;
  return img;
}

unsigned char quantize_channel(double c) {
  return static_cast<unsigned char>(std::lround(255.0 * std::clamp(c, 0.0, 1.0)));
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.pixels.size()));
  for (Eigen::Index p = 0; p < image.pixels.cols(); ++p) {
    for (int ch = 0; ch < 3; ++ch) out.push_back(static_cast<char>(quantize_channel(image.pixels(ch, p))));
  }
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, skipping comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

}  // namespace

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw FormatError("PPM: missing P6 magic");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(bytes, pos));
    h = std::stoi(next_token(bytes, pos));
    maxval = std::stoi(next_token(bytes, pos));
  } catch (const std::exception&) {
    throw FormatError("PPM: malformed header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("PPM: unsupported dimensions or maxval");
  ++pos;  // single whitespace byte after maxval
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() < pos + need) throw FormatError("PPM: truncated pixel data");
  Image img(w, h);
  for (Eigen::Index p = 0; p < img.pixels.cols(); ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      img.pixels(ch, p) = static_cast<unsigned char>(bytes[pos++]) / 255.0;
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_ppm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_ppm(ss.str());
}

}  // namespace probnerf
