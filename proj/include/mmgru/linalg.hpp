// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Dense row-major linear algebra over 64-bit floats.
//
// Vectors are row vectors throughout: a layer maps x (1 x d_in) to x . W
// with W stored as d_in x d_out, matching the x·W convention of the model
// equations. Nothing here is tuned for speed; all routines are plain loops
// with a fixed accumulation order so results are bit-reproducible.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mmgru {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0);
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major `values`; size must equal rows * cols and
  /// every element must be finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  /// Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// SplitMix64 (Steele, Lea & Flood 2014). Output depends only on the seed and
/// the number of draws, so streams are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); unbiased (rejection sampling). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

Matrix matmul(const Matrix& a, const Matrix& b);
/// x . M for a row vector x; requires x.size() == M.rows().
Vector vecmat(const Vector& x, const Matrix& m);
/// x . M^T; requires x.size() == M.cols(). Used to push gradients back
/// through a projection.
Vector vecmat_transposed(const Vector& x, const Matrix& m);
/// m += outer(x, d), i.e. m(i, j) += x[i] * d[j].
void add_outer(Matrix& m, const Vector& x, const Vector& d);
Matrix transpose(const Matrix& m);

Vector hadamard(const Vector& a, const Vector& b);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double s);
/// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dot(const Vector& a, const Vector& b);
double sum(const Vector& a);
double squared_norm(std::span<const double> values);
double max_abs(std::span<const double> values);

Vector sigmoid(const Vector& x);
Vector tanh(const Vector& x);
double sigmoid(double x);
double tanh(double x);
/// Max-subtracted softmax; outputs are nonnegative and sum to 1.
Vector softmax(const Vector& y);

/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(const Vector& v);

bool all_finite(std::span<const double> values);

/// Matrix with i.i.d. entries uniform in [-scale, scale).
Matrix init_uniform(Rng& rng, std::size_t rows, std::size_t cols, double scale);

}  // namespace mmgru
