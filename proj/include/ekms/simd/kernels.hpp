#pragma once

#include <cstddef>
#include <string_view>

namespace ekms::simd {

enum class Level { Scalar, Avx2 };

// Kernel table. All pointers are non-null once resolved.
struct Kernels {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = A x, A row-major rows x cols
  void (*matvec)(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
  // sum_i w[i] * a[i] * b[i]
  double (*weighted_dot3)(const double* w, const double* a, const double* b, std::size_t n);
  // x <- (1 - lambda) x + lambda * target; returns max_i |target[i] - x_old[i]|
  double (*damped_update)(double* x, const double* target, double lambda, std::size_t n);
};

const Kernels& scalar_kernels();
#if EKMS_HAVE_AVX2
const Kernels& avx2_kernels();
#endif

bool cpu_has_avx2();

// Active table. First use picks the best level the CPU supports, unless
// EKMS_SIMD=scalar|avx2 says otherwise.
const Kernels& active();
Level active_level();

// Forces a level; returns false (and leaves the level unchanged) if unsupported.
bool set_level(Level level);

std::string_view to_string(Level level);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void matvec(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  active().matvec(A, x, y, rows, cols);
}
inline double weighted_dot3(const double* w, const double* a, const double* b, std::size_t n) {
  return active().weighted_dot3(w, a, b, n);
}
inline double damped_update(double* x, const double* target, double lambda, std::size_t n) {
  return active().damped_update(x, target, lambda, n);
}

}  // namespace ekms::simd
