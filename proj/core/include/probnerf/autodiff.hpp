#pragma once

// Tape-based reverse-mode differentiation over dense matrices.
//
// Every node on the tape holds a dense matrix value. Batched quantities use
// one column per sample (features x batch), so an MLP layer over a batch of
// points is a single matrix product. Parameters live in flat column vectors
// and layers read their weights as slices of those vectors.

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "probnerf/errors.hpp"

namespace probnerf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  double scalar() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Index size() const { return value().size(); }

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Propagates the adjoint of node `self` into the adjoints of its inputs.
  using Backward = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf whose gradient is wanted.
  Var variable(Matrix value);
  Var variable(const Vector& value) { return variable(Matrix(value)); }
  // Leaf treated as data; no adjoint is propagated into it.
  Var constant(Matrix value);
  Var constant(const Vector& value) { return constant(Matrix(value)); }
  // Constant that aliases `value` without copying; `value` must outlive the
  // tape and stay unmodified.
  Var reference(const Matrix& value);
  Var reference(Matrix&&) = delete;

  // Appends the result of a primitive. Throws NonFiniteError naming the
  // primitive if `value` contains NaN or Inf.
  Var record(Matrix value, const char* primitive, std::initializer_list<Var> inputs,
             Backward backward);
  Var record(Matrix value, const char* primitive, std::span<const Var> inputs,
             Backward backward);

  // Seeds the adjoint of `output` with ones and sweeps the tape once.
  void backward(const Var& output);

  const Matrix& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external ? *n.external : n.value;
  }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool requires_grad(const Var& v) const { return requires_grad(v.id()); }

  // Adjoint accumulator of a node, zero-initialized on first access.
  Matrix& adjoint(int id);
  bool has_adjoint(int id) const { return nodes_[static_cast<std::size_t>(id)].has_adjoint; }

  // Gradient of the last backward() output with respect to `v`; zeros if
  // `v` did not influence it.
  Matrix gradient(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix adjoint;
    Backward backward;
    bool requires_grad = false;
    bool has_adjoint = false;
  };

  Var push(Matrix value, bool requires_grad, Backward backward);

  std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// A scalar-valued function of a flat parameter vector, expressed on a tape.
using ScalarFn = std::function<Var(Tape&, const Var& params)>;

double evaluate(const ScalarFn& fn, const Vector& params);

struct ValueAndGradient {
  double value = 0.0;
  Vector gradient;
};

ValueAndGradient value_and_gradient(const ScalarFn& fn, const Vector& params);
Vector gradient(const ScalarFn& fn, const Vector& params);

struct GradCheckReport {
  double max_relative_error = 0.0;
  Index argmax = 0;
  double step = 0.0;
};

// Relative error per coordinate is |a - f| / max(|a|, |f|, 1e-8) where a is
// the reverse-mode gradient and f the central difference. An empty
// `coordinates` span checks every coordinate.
GradCheckReport check_gradient(const ScalarFn& fn, const Vector& params, double fd_step,
                               std::span<const Index> coordinates = {});

}  // namespace ad
}  // namespace probnerf
