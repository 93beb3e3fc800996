#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "probnerf/autodiff.hpp"

namespace probnerf::io {

void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, const Vector& v);

class Reader {
 public:
  Reader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  void expect_magic(std::string_view magic);
  std::uint32_t u32();
  std::string bytes(std::size_t n);
  Vector f32(Index n);
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;

  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace probnerf::io
