#include <algorithm>
#include <cmath>

#include "ekms/simd/kernels.hpp"

namespace ekms::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matvec_scalar(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(A + r * cols, x, cols);
}

double weighted_dot3_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

double damped_update_scalar(double* x, const double* target, double lambda, std::size_t n) {
  double res = 0.0;
  bool nan = false;
  for (std::size_t i = 0; i < n; ++i) {
    double d = target[i] - x[i];
    nan |= std::isnan(d);
    res = std::max(res, std::abs(d));
    x[i] += lambda * d;
  }
  return nan ? std::nan("") : res;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{dot_scalar, matvec_scalar, weighted_dot3_scalar, damped_update_scalar};
  return k;
}

}  // namespace ekms::simd
