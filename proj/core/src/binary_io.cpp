#include "probnerf/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "probnerf/errors.hpp"

namespace probnerf::io {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_f32(std::string& out, const Vector& v) {
  const std::size_t start = out.size();
  out.resize(start + 4 * static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v[i]);
    std::memcpy(out.data() + start + 4 * static_cast<std::size_t>(i), &f, 4);
  }
}

void Reader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) throw FormatError(what_ + ": truncated data");
}

void Reader::expect_magic(std::string_view magic) {
  need(magic.size());
  if (std::string_view(bytes_).substr(pos_, magic.size()) != magic) {
    throw FormatError(what_ + ": bad magic");
  }
  pos_ += magic.size();
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::string Reader::bytes(std::size_t n) {
  need(n);
  std::string s = bytes_.substr(pos_, n);
  pos_ += n;
  return s;
}

Vector Reader::f32(Index n) {
  need(4 * static_cast<std::size_t>(n));
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, bytes_.data() + pos_ + 4 * static_cast<std::size_t>(i), 4);
    v[i] = f;
  }
  pos_ += 4 * static_cast<std::size_t>(n);
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace probnerf::io
