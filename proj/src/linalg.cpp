// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmgru/errors.hpp"

namespace mmgru {

namespace {

std::string vec_shape(std::size_t n) { return "(" + std::to_string(n) + ")"; }

void require_same_len(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch " + vec_shape(a.size()) + " vs " +
                     vec_shape(b.size()));
  }
}

void require_finite(std::span<const double> values, const char* op) {
  if (!all_finite(values)) {
    throw NumericError(std::string(op) + ": non-finite result");
  }
}

// Largest double strictly below 1. Logistic and tanh outputs are clamped so
// the open-interval range holds even where the exact value rounds to +-1.
constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2;

}  // namespace

Vector::Vector(std::size_t len, double fill) : data_(len, fill) {}

Vector::Vector(std::initializer_list<double> values) : data_(values) {}

Vector::Vector(std::vector<double> values) : data_(std::move(values)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " values for shape (" +
                     std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged row literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw ParameterError("Rng::uniform_index: n must be positive");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: shape mismatch " + a.shape_string() + " . " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  require_finite(out.values(), "matmul");
  return out;
}

Vector vecmat(const Vector& x, const Matrix& m) {
  if (x.size() != m.rows()) {
    throw ShapeError("vecmat: shape mismatch (1x" + std::to_string(x.size()) + ") . " +
                     m.shape_string());
  }
  Vector out(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += xi * r[j];
  }
  require_finite(out.values(), "vecmat");
  return out;
}

Vector vecmat_transposed(const Vector& x, const Matrix& m) {
  if (x.size() != m.cols()) {
    throw ShapeError("vecmat_transposed: shape mismatch (1x" + std::to_string(x.size()) +
                     ") . " + m.shape_string() + "^T");
  }
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
  require_finite(out.values(), "vecmat_transposed");
  return out;
}

void add_outer(Matrix& m, const Vector& x, const Vector& d) {
  if (x.size() != m.rows() || d.size() != m.cols()) {
    throw ShapeError("add_outer: outer(" + std::to_string(x.size()) + ", " +
                     std::to_string(d.size()) + ") into " + m.shape_string());
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] += xi * d[j];
  }
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_len(a, b, "hadamard");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  require_same_len(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  require_same_len(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(const Vector& a, double s) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

void axpy(double alpha, const Vector& x, Vector& y) {
  require_same_len(x, y, "axpy");
  axpy(alpha, x.values(), y.values());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw ShapeError("axpy: length mismatch " + vec_shape(x.size()) + " vs " +
                     vec_shape(y.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vector& a, const Vector& b) {
  require_same_len(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const Vector& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  return acc;
}

double squared_norm(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double sigmoid(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, std::numeric_limits<double>::denorm_min(), kBelowOne);
}

double tanh(double x) { return std::clamp(std::tanh(x), -kBelowOne, kBelowOne); }

Vector sigmoid(const Vector& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

Vector tanh(const Vector& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = tanh(x[i]);
  return out;
}

Vector softmax(const Vector& y) {
  Vector out(y.size());
  if (y.empty()) return out;
  const double m = *std::max_element(y.values().begin(), y.values().end());
  double z = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = std::exp(y[i] - m);
    z += out[i];
  }
  for (std::size_t i = 0; i < y.size(); ++i) out[i] /= z;
  return out;
}

std::size_t argmax(const Vector& v) {
  if (v.empty()) throw ParameterError("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Matrix init_uniform(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("init_uniform: scale must be positive and finite, got " +
                         std::to_string(scale));
  }
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = rng.uniform(-scale, scale);
  return Matrix(rows, cols, std::move(values));
}

}  // namespace mmgru
