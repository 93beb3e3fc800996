#include "probnerf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace probnerf::ad {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

// Records y = f(a) with dy/da computed from (a, y) at backward time.
template <typename Forward, typename Derivative>
Var unary(const Var& a, const char* name, Forward forward, Derivative derivative) {
  Tape& tape = a.tape();
  Matrix y = a.value().unaryExpr(forward);
  const int ia = a.id();
  return tape.record(std::move(y), name, {a}, [ia, derivative](Tape& t, int self) {
    const Matrix& x = t.value(ia);
    const Matrix& out = t.value(self);
    const Matrix& g = t.adjoint(self);
    Matrix& da = t.adjoint(ia);
    for (Index k = 0; k < x.size(); ++k) da(k) += g(k) * derivative(x(k), out(k));
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() + b.value(), "add", {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    if (t.requires_grad(ia)) t.adjoint(ia) += g;
    if (t.requires_grad(ib)) t.adjoint(ib) += g;
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() - b.value(), "sub", {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    if (t.requires_grad(ia)) t.adjoint(ia) += g;
    if (t.requires_grad(ib)) t.adjoint(ib) -= g;
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value().cwiseProduct(b.value()), "mul", {a, b},
                         [ia, ib](Tape& t, int self) {
                           const Matrix& g = t.adjoint(self);
                           if (t.requires_grad(ia)) t.adjoint(ia) += g.cwiseProduct(t.value(ib));
                           if (t.requires_grad(ib)) t.adjoint(ib) += g.cwiseProduct(t.value(ia));
                         });
}

Var div(const Var& a, const Var& b) {
  require_same_shape(a, b, "div");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value().cwiseQuotient(b.value()), "div", {a, b},
                         [ia, ib](Tape& t, int self) {
                           const Matrix& g = t.adjoint(self);
                           const Matrix& bv = t.value(ib);
                           if (t.requires_grad(ia)) t.adjoint(ia) += g.cwiseQuotient(bv);
                           if (t.requires_grad(ib)) {
                             t.adjoint(ib) -=
                                 g.cwiseProduct(t.value(self)).cwiseQuotient(bv);
                           }
                         });
}

Var affine_scalar(const Var& a, double scale, double shift) {
  const int ia = a.id();
  Matrix y = (scale * a.value().array() + shift).matrix();
  return a.tape().record(std::move(y), "affine_scalar", {a}, [ia, scale](Tape& t, int self) {
    t.adjoint(ia) += scale * t.adjoint(self);
  });
}

Var add_const(const Var& a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw ShapeError("add_const: shape mismatch");
  const int ia = a.id();
  return a.tape().record(a.value() + c, "add_const", {a},
                         [ia](Tape& t, int self) { t.adjoint(ia) += t.adjoint(self); });
}

Var mul_const(const Var& a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw ShapeError("mul_const: shape mismatch");
  const int ia = a.id();
  return a.tape().record(a.value().cwiseProduct(c), "mul_const", {a}, [ia, c](Tape& t, int self) {
    t.adjoint(ia) += t.adjoint(self).cwiseProduct(c);
  });
}

Var sin(const Var& a) {
  return unary(
      a, "sin", [](double x) { return std::sin(x); },
      [](double x, double) { return std::cos(x); });
}

Var exp(const Var& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var tanh(const Var& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(a, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var softplus(const Var& a) {
  return unary(a, "softplus", stable_softplus,
               [](double x, double) { return stable_sigmoid(x); });
}

Var relu(const Var& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var square(const Var& a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sum(const Var& a) {
  const int ia = a.id();
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  return a.tape().record(std::move(y), "sum", {a}, [ia](Tape& t, int self) {
    t.adjoint(ia).array() += t.adjoint(self)(0, 0);
  });
}

Var mean_cols(const Var& a) {
  const int ia = a.id();
  const Index n = a.cols();
  if (n == 0) throw ShapeError("mean_cols: no columns");
  Matrix y = a.value().rowwise().mean();
  return a.tape().record(std::move(y), "mean_cols", {a}, [ia, n](Tape& t, int self) {
    t.adjoint(ia).colwise() += t.adjoint(self).col(0) / static_cast<double>(n);
  });
}

Var broadcast_cols(const Var& a, Index cols) {
  if (a.cols() != 1) throw ShapeError("broadcast_cols: input must be a column");
  const int ia = a.id();
  Matrix y = a.value().replicate(1, cols);
  return a.tape().record(std::move(y), "broadcast_cols", {a}, [ia](Tape& t, int self) {
    t.adjoint(ia) += t.adjoint(self).rowwise().sum();
  });
}

Var slice_rows(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") outside " + std::to_string(a.rows()) +
                     " rows");
  }
  const int ia = a.id();
  Matrix y = a.value().middleRows(start, count);
  return a.tape().record(std::move(y), "slice_rows", {a}, [ia, start, count](Tape& t, int self) {
    t.adjoint(ia).middleRows(start, count) += t.adjoint(self);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column count mismatch");
    rows += p.rows();
  }
  Matrix y(rows, cols);
  std::vector<int> ids;
  std::vector<Index> starts;
  Index at = 0;
  for (const Var& p : parts) {
    y.middleRows(at, p.rows()) = p.value();
    ids.push_back(p.id());
    starts.push_back(at);
    at += p.rows();
  }
  return parts[0].tape().record(std::move(y), "concat_rows", parts,
                                [ids, starts](Tape& t, int self) {
                                  const Matrix& g = t.adjoint(self);
                                  for (std::size_t k = 0; k < ids.size(); ++k) {
                                    if (!t.requires_grad(ids[k])) continue;
                                    Matrix& d = t.adjoint(ids[k]);
                                    d += g.middleRows(starts[k], d.rows());
                                  }
                                });
}

Var gather_rows(const Var& a, std::span<const Index> index) {
  const Matrix& v = a.value();
  Matrix y(static_cast<Index>(index.size()), v.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= v.rows()) throw ShapeError("gather_rows: index out of range");
    y.row(static_cast<Index>(i)) = v.row(index[i]);
  }
  const int ia = a.id();
  std::vector<Index> idx(index.begin(), index.end());
  return a.tape().record(std::move(y), "gather_rows", {a}, [ia, idx](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    Matrix& d = t.adjoint(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) d.row(idx[i]) += g.row(static_cast<Index>(i));
  });
}

Var affine(const Var& params, Index offset, Index out, Index in, const Var& x) {
  if (x.rows() != in) {
    throw ShapeError("affine: input has " + std::to_string(x.rows()) + " rows, layer expects " +
                     std::to_string(in));
  }
  return affine(params, offset, out, {x});
}

Var affine(const Var& params, Index offset, Index out, std::span<const Var> inputs) {
  if (inputs.empty()) throw ShapeError("affine: no inputs");
  const Matrix& p = params.value();
  Index in = 0;
  const Index batch = inputs[0].cols();
  std::vector<int> ids;
  std::vector<Index> widths;
  for (const Var& x : inputs) {
    if (x.cols() != batch) throw ShapeError("affine: inputs disagree on batch size");
    in += x.rows();
    ids.push_back(x.id());
    widths.push_back(x.rows());
  }
  if (p.cols() != 1) throw ShapeError("affine: parameter source must be a column vector");
  if (offset < 0 || offset + out * in + out > p.rows()) {
    throw ShapeError("affine: layer slice exceeds parameter vector (need " +
                     std::to_string(offset + out * in + out) + ", have " +
                     std::to_string(p.rows()) + ")");
  }
  using Strided = Eigen::Map<const RowMajor, 0, Eigen::OuterStride<>>;
  using StridedMut = Eigen::Map<RowMajor, 0, Eigen::OuterStride<>>;
  Matrix y(out, batch);
  Index col = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Strided w(p.data() + offset + col, out, widths[k], Eigen::OuterStride<>(in));
    if (k == 0) {
      y.noalias() = w * inputs[k].value();
    } else {
      y.noalias() += w * inputs[k].value();
    }
    col += widths[k];
  }
  y.colwise() += Eigen::Map<const Vector>(p.data() + offset + out * in, out);

  std::vector<Var> all(inputs.begin(), inputs.end());
  all.push_back(params);
  const int ip = params.id();
  return params.tape().record(
      std::move(y), "affine", std::span<const Var>(all),
      [ip, ids, widths, offset, out, in](Tape& t, int self) {
        const Matrix& g = t.adjoint(self);
        const bool want_p = t.requires_grad(ip);
        Index col = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (want_p) {
            Matrix& dp = t.adjoint(ip);
            StridedMut dw(dp.data() + offset + col, out, widths[k], Eigen::OuterStride<>(in));
            dw.noalias() += g * t.value(ids[k]).transpose();
          }
          if (t.requires_grad(ids[k])) {
            const Matrix& pv = t.value(ip);
            Strided w(pv.data() + offset + col, out, widths[k], Eigen::OuterStride<>(in));
            t.adjoint(ids[k]).noalias() += w.transpose() * g;
          }
          col += widths[k];
        }
        if (want_p) {
          Matrix& dp = t.adjoint(ip);
          Eigen::Map<Vector>(dp.data() + offset + out * in, out) += g.rowwise().sum();
        }
      });
}

namespace {

Matrix im2col(const Matrix& x, const Conv2dShape& s) {
  const Index oh = s.out_height(), ow = s.out_width(), k = s.kernel;
  Matrix cols = Matrix::Zero(s.in_channels * k * k, oh * ow);
  for (Index c = 0; c < s.in_channels; ++c) {
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        const Index row = (c * k + ky) * k + kx;
        for (Index oy = 0; oy < oh; ++oy) {
          const Index iy = oy * s.stride + ky - s.padding;
          if (iy < 0 || iy >= s.height) continue;
          for (Index ox = 0; ox < ow; ++ox) {
            const Index ix = ox * s.stride + kx - s.padding;
            if (ix < 0 || ix >= s.width) continue;
            cols(row, oy * ow + ox) = x(c, iy * s.width + ix);
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(const Matrix& cols, const Conv2dShape& s, Matrix& dx) {
  const Index oh = s.out_height(), ow = s.out_width(), k = s.kernel;
  for (Index c = 0; c < s.in_channels; ++c) {
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        const Index row = (c * k + ky) * k + kx;
        for (Index oy = 0; oy < oh; ++oy) {
          const Index iy = oy * s.stride + ky - s.padding;
          if (iy < 0 || iy >= s.height) continue;
          for (Index ox = 0; ox < ow; ++ox) {
            const Index ix = ox * s.stride + kx - s.padding;
            if (ix < 0 || ix >= s.width) continue;
            dx(c, iy * s.width + ix) += cols(row, oy * ow + ox);
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& params, Index offset, const Conv2dShape& shape, const Var& x) {
  if (x.rows() != shape.in_channels || x.cols() != shape.height * shape.width) {
    throw ShapeError("conv2d: input must be " + std::to_string(shape.in_channels) + " x " +
                     std::to_string(shape.height * shape.width));
  }
  const Matrix& p = params.value();
  const Index fan_in = shape.in_channels * shape.kernel * shape.kernel;
  if (p.cols() != 1 || offset + shape.weight_count() > p.rows()) {
    throw ShapeError("conv2d: layer slice exceeds parameter vector");
  }
  auto cols = std::make_shared<Matrix>(im2col(x.value(), shape));
  Eigen::Map<const RowMajor> w(p.data() + offset, shape.out_channels, fan_in);
  Eigen::Map<const Vector> b(p.data() + offset + shape.out_channels * fan_in, shape.out_channels);
  Matrix y = w * (*cols);
  y.colwise() += b;
  const int ip = params.id(), ix = x.id();
  return x.tape().record(
      std::move(y), "conv2d", {params, x}, [ip, ix, offset, shape, fan_in, cols](Tape& t, int self) {
        const Matrix& g = t.adjoint(self);
        if (t.requires_grad(ip)) {
          Matrix& dp = t.adjoint(ip);
          Eigen::Map<RowMajor> dw(dp.data() + offset, shape.out_channels, fan_in);
          dw.noalias() += g * cols->transpose();
          Eigen::Map<Vector> db(dp.data() + offset + shape.out_channels * fan_in,
                                shape.out_channels);
          db += g.rowwise().sum();
        }
        if (t.requires_grad(ix)) {
          const Matrix& pv = t.value(ip);
          Eigen::Map<const RowMajor> w(pv.data() + offset, shape.out_channels, fan_in);
          Matrix dcols = w.transpose() * g;
          col2im_add(dcols, shape, t.adjoint(ix));
        }
      });
}

Var composite(const Var& alpha, const Var& color, std::span<const Index> offsets,
              const Eigen::Vector3d& background) {
  if (alpha.rows() != 1 || color.rows() != 3 || alpha.cols() != color.cols()) {
    throw ShapeError("composite: expects alpha 1xP and color 3xP");
  }
  if (offsets.empty() || offsets.back() != alpha.cols()) {
    throw ShapeError("composite: segment offsets do not cover the samples");
  }
  const Index rays = static_cast<Index>(offsets.size()) - 1;
  const Matrix& a = alpha.value();
  const Matrix& c = color.value();
  Matrix out(3, rays);
  for (Index r = 0; r < rays; ++r) {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    double transmittance = 1.0;
    for (Index k = offsets[r]; k < offsets[r + 1]; ++k) {
      acc += c.col(k) * (a(0, k) * transmittance);
      transmittance *= 1.0 - a(0, k);
    }
    out.col(r) = acc + background * transmittance;
  }
  std::vector<Index> off(offsets.begin(), offsets.end());
  const int ia = alpha.id(), ic = color.id();
  return alpha.tape().record(
      std::move(out), "composite", {alpha, color},
      [ia, ic, off, background](Tape& t, int self) {
        const Matrix& g = t.adjoint(self);
        const Matrix& av = t.value(ia);
        const Matrix& cv = t.value(ic);
        const bool want_a = t.requires_grad(ia), want_c = t.requires_grad(ic);
        Matrix* da = want_a ? &t.adjoint(ia) : nullptr;
        Matrix* dc = want_c ? &t.adjoint(ic) : nullptr;
        std::vector<double> trans;
        for (std::size_t r = 0; r + 1 < off.size(); ++r) {
          const Index begin = off[r], end = off[r + 1];
          trans.resize(static_cast<std::size_t>(end - begin));
          double tr = 1.0;
          for (Index k = begin; k < end; ++k) {
            trans[static_cast<std::size_t>(k - begin)] = tr;
            tr *= 1.0 - av(0, k);
          }
          const Eigen::Vector3d gr = g.col(static_cast<Index>(r));
          // Color seen from behind sample k, composited back to front.
          Eigen::Vector3d behind = background;
          for (Index k = end - 1; k >= begin; --k) {
            const double tk = trans[static_cast<std::size_t>(k - begin)];
            const double ak = av(0, k);
            if (dc) dc->col(k) += gr * (ak * tk);
            if (da) (*da)(0, k) += tk * gr.dot(cv.col(k) - behind);
            behind = cv.col(k) * ak + behind * (1.0 - ak);
          }
        }
      });
}

}  // namespace probnerf::ad
