#pragma once

// Differentiable primitives. Each records one node on the input's tape.

#include <span>
#include <vector>

#include "probnerf/autodiff.hpp"

namespace probnerf::ad {

// Elementwise arithmetic on equal shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

// scale * a + shift.
Var affine_scalar(const Var& a, double scale, double shift);
Var add_const(const Var& a, const Matrix& c);
Var mul_const(const Var& a, const Matrix& c);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator*(const Var& a, double c) { return affine_scalar(a, c, 0.0); }
inline Var operator*(double c, const Var& a) { return affine_scalar(a, c, 0.0); }
inline Var operator+(const Var& a, double c) { return affine_scalar(a, 1.0, c); }
inline Var operator-(const Var& a, double c) { return affine_scalar(a, 1.0, -c); }
inline Var operator-(const Var& a) { return affine_scalar(a, -1.0, 0.0); }

Var sin(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var relu(const Var& a);
Var square(const Var& a);

// Sum of all entries (1x1).
Var sum(const Var& a);
// Row means over columns: (r x c) -> (r x 1).
Var mean_cols(const Var& a);
// Repeats a column vector: (r x 1) -> (r x cols).
Var broadcast_cols(const Var& a, Index cols);

Var slice_rows(const Var& a, Index start, Index count);
Var concat_rows(std::span<const Var> parts);
inline Var concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}
// out.row(i) = a.row(index[i]).
Var gather_rows(const Var& a, std::span<const Index> index);

// Dense layer whose weights are a slice of the column vector `params`:
// W (out x in, row-major) at `offset`, followed by the bias (out).
// Returns W * x + b broadcast over the columns of x.
Var affine(const Var& params, Index offset, Index out, Index in, const Var& x);

// Dense layer over the row-concatenation of `inputs` without materializing
// it; `in` is the sum of the inputs' row counts.
Var affine(const Var& params, Index offset, Index out, std::span<const Var> inputs);
inline Var affine(const Var& params, Index offset, Index out, std::initializer_list<Var> inputs) {
  return affine(params, offset, out, std::span<const Var>(inputs.begin(), inputs.size()));
}

struct Conv2dShape {
  Index in_channels = 0;
  Index out_channels = 0;
  Index height = 0;
  Index width = 0;
  Index kernel = 3;
  Index stride = 1;
  Index padding = 1;

  Index out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  Index out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  Index weight_count() const { return out_channels * in_channels * kernel * kernel + out_channels; }
};

// 2D convolution of one image stored as (channels x height*width), row-major
// pixels. Weights at `offset` in `params`: out_channels x (in_channels *
// kernel * kernel) row-major, then out_channels biases.
Var conv2d(const Var& params, Index offset, const Conv2dShape& shape, const Var& x);

// Front-to-back alpha compositing of ray segments. `alpha` is 1 x P,
// `color` is 3 x P, and ray r owns samples [offsets[r], offsets[r+1]).
// Output is 3 x R: sum_i c_i a_i prod_{j<i}(1 - a_j) + bg prod_j (1 - a_j).
Var composite(const Var& alpha, const Var& color, std::span<const Index> offsets,
              const Eigen::Vector3d& background);

}  // namespace probnerf::ad
