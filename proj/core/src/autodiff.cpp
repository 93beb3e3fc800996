#include "probnerf/autodiff.hpp"

#include <algorithm>
#include <cmath>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace probnerf::ad {

namespace {

// Tapes allocate and free many large node buffers; keep freed memory in the
// heap instead of returning it to the kernel on every release.
bool tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 256 << 20);
#endif
  return true;
}

}  // namespace

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("scalar() on a non-scalar node");
  return v(0, 0);
}

Var Tape::push(Matrix value, bool requires_grad, Backward backward) {
  [[maybe_unused]] static const bool tuned = tune_allocator();
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::variable(Matrix value) {
  if (!value.allFinite()) throw NonFiniteError("variable");
  return push(std::move(value), true, nullptr);
}

Var Tape::constant(Matrix value) {
  if (!value.allFinite()) throw NonFiniteError("constant");
  return push(std::move(value), false, nullptr);
}

Var Tape::reference(const Matrix& value) {
  if (!value.allFinite()) throw NonFiniteError("constant");
  Var v = push(Matrix(), false, nullptr);
  nodes_.back().external = &value;
  return v;
}

Var Tape::record(Matrix value, const char* primitive, std::initializer_list<Var> inputs,
                 Backward backward) {
  return record(std::move(value), primitive, std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Matrix value, const char* primitive, std::span<const Var> inputs,
                 Backward backward) {
  if (!value.allFinite()) throw NonFiniteError(primitive);
  bool needs = false;
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ShapeError(std::string(primitive) + ": inputs from another tape");
    needs = needs || requires_grad(in.id());
  }
  return push(std::move(value), needs, std::move(backward));
}

Matrix& Tape::adjoint(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.has_adjoint) {
    const Matrix& v = n.external ? *n.external : n.value;
    n.adjoint = Matrix::Zero(v.rows(), v.cols());
    n.has_adjoint = true;
  }
  return n.adjoint;
}

void Tape::backward(const Var& output) {
  for (Node& n : nodes_) {
    n.has_adjoint = false;
    n.adjoint.resize(0, 0);
  }
  adjoint(output.id()).setOnes();
  for (int id = output.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.has_adjoint && n.backward) n.backward(*this, id);
  }
}

Matrix Tape::gradient(const Var& v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (!n.has_adjoint) return Matrix::Zero(v.rows(), v.cols());
  return n.adjoint;
}

double evaluate(const ScalarFn& fn, const Vector& params) {
  Tape tape;
  Var p = tape.constant(params);
  return fn(tape, p).scalar();
}

ValueAndGradient value_and_gradient(const ScalarFn& fn, const Vector& params) {
  Tape tape;
  Var p = tape.variable(params);
  Var out = fn(tape, p);
  ValueAndGradient result;
  result.value = out.scalar();
  tape.backward(out);
  result.gradient = tape.gradient(p).reshaped();
  return result;
}

Vector gradient(const ScalarFn& fn, const Vector& params) {
  return value_and_gradient(fn, params).gradient;
}

GradCheckReport check_gradient(const ScalarFn& fn, const Vector& params, double fd_step,
                               std::span<const Index> coordinates) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("check_gradient: fd_step must be positive");
  const Vector analytic = gradient(fn, params);

  std::vector<Index> all;
  if (coordinates.empty()) {
    all.resize(static_cast<std::size_t>(params.size()));
    for (Index i = 0; i < params.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    coordinates = all;
  }

  GradCheckReport report;
  report.step = fd_step;
  Vector probe = params;
  for (Index i : coordinates) {
    probe[i] = params[i] + fd_step;
    const double up = evaluate(fn, probe);
    probe[i] = params[i] - fd_step;
    const double down = evaluate(fn, probe);
    probe[i] = params[i];
    const double fd = (up - down) / (2.0 * fd_step);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
    const double rel = std::abs(a - fd) / denom;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.argmax = i;
    }
  }
  return report;
}

}  // namespace probnerf::ad
