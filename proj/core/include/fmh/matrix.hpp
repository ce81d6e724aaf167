#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fmh::num {

/// Dense row-major matrix of 64-bit reals. The only linear-algebra type in
/// the project; everything network-related is built on top of it.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major, size rows*cols

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0);

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int r) const { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  std::size_t size() const { return data.size(); }
};

// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b^T
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
// out = a^T * b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);

bool all_finite(std::span<const double> v);

/// Throws std::runtime_error with `what` if the condition is false. Used for
/// the fatal dimension/configuration checks throughout the library.
void require(bool condition, const std::string& what);

}  // namespace fmh::num
