#include "probnerf/modulation.hpp"

#include <string>

namespace probnerf {

namespace {

Vector relu(const Vector& v) { return v.cwiseMax(0.0); }

void check_layer(const Matrix& w, const Vector& b, Index in, std::size_t layer) {
  if (w.cols() != in || b.size() != w.rows()) {
    throw ShapeError("modulated MLP layer " + std::to_string(layer) + ": weight is " +
                     std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                     ", expected input width " + std::to_string(in));
  }
}

}  // namespace

Vector mlp_forward(const Mlp& mlp, const Vector& input) {
  Vector h = input;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    check_layer(mlp.weights[i], mlp.biases[i], h.size(), i);
    Vector a = mlp.weights[i] * h + mlp.biases[i];
    h = (i + 1 < mlp.weights.size()) ? relu(a) : a;
  }
  return h;
}

Vector modulated_forward_shift(const Vector& z, const Mlp& base, const std::vector<Matrix>& shifts,
                               const Vector& input) {
  if (shifts.size() != base.weights.size()) throw ShapeError("shift count != layer count");
  Vector h = input;
  for (std::size_t i = 0; i < base.weights.size(); ++i) {
    check_layer(base.weights[i], base.biases[i], h.size(), i);
    if (shifts[i].rows() != base.weights[i].rows() || shifts[i].cols() != z.size()) {
      throw ShapeError("shift matrix " + std::to_string(i) + " has the wrong shape");
    }
    Vector a = base.weights[i] * h + base.biases[i] + shifts[i] * z;
    h = (i + 1 < base.weights.size()) ? relu(a) : a;
  }
  return h;
}

Vector modulated_forward_concat(const Vector& z, const Mlp& augmented, const Vector& input) {
  Vector h = input;
  for (std::size_t i = 0; i < augmented.weights.size(); ++i) {
    Vector joint(h.size() + z.size());
    joint << h, z;
    check_layer(augmented.weights[i], augmented.biases[i], joint.size(), i);
    Vector a = augmented.weights[i] * joint + augmented.biases[i];
    h = (i + 1 < augmented.weights.size()) ? relu(a) : a;
  }
  return h;
}

Mlp augment_with_shifts(const Mlp& base, const std::vector<Matrix>& shifts) {
  if (shifts.size() != base.weights.size()) throw ShapeError("shift count != layer count");
  Mlp out;
  for (std::size_t i = 0; i < base.weights.size(); ++i) {
    const Matrix& w = base.weights[i];
    if (shifts[i].rows() != w.rows()) throw ShapeError("shift matrix row mismatch");
    Matrix joint(w.rows(), w.cols() + shifts[i].cols());
    joint << w, shifts[i];
    out.weights.push_back(std::move(joint));
    out.biases.push_back(base.biases[i]);
  }
  return out;
}

}  // namespace probnerf
