#include "fmh/matrix.hpp"

#include <cblas.h>

#include <cmath>
#include <stdexcept>

extern "C" void openblas_set_num_threads(int);

namespace fmh::num {

namespace {

// Training must be bit-reproducible for a fixed seed; a fixed thread count
// keeps BLAS summation order deterministic.
struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};
const BlasInit blas_init;

}  // namespace

Matrix::Matrix(int r, int c, double fill)
    : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
  require(r >= 0 && c >= 0, "matrix dimensions must be non-negative");
}

void require(bool condition, const std::string& what) {
  if (!condition) throw std::runtime_error(what);
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  out = Matrix(a.rows, b.cols);
  if (a.rows == 0 || b.cols == 0 || a.cols == 0) return;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols,
              1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
              out.data.data(), out.cols);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.cols == b.cols, "matmul_nt: inner dimensions differ");
  out = Matrix(a.rows, b.rows);
  if (a.rows == 0 || b.rows == 0 || a.cols == 0) return;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, a.rows, b.rows, a.cols,
              1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
              out.data.data(), out.cols);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.rows == b.rows, "matmul_tn: inner dimensions differ");
  out = Matrix(a.cols, b.cols);
  if (a.cols == 0 || b.cols == 0 || a.rows == 0) return;
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, a.cols, b.cols, a.rows,
              1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
              out.data.data(), out.cols);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace fmh::num
