#pragma once

#include <stdexcept>
#include <string>

namespace probnerf {

// Raised when a primitive produces NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(std::string primitive)
      : std::runtime_error("non-finite value produced by primitive '" + primitive + "'"),
        primitive_(std::move(primitive)) {}

  const std::string& primitive() const noexcept { return primitive_; }

 private:
  std::string primitive_;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidCameraError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace probnerf
