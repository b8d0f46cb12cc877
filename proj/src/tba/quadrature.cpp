#include "ekms/tba/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "ekms/error.hpp"

namespace ekms::tba {

bool QuadratureGrid::valid() const {
  if (nodes.empty() || nodes.size() != weights.size() || !(cutoff > 0.0)) return false;
  for (std::size_t m = 1; m < nodes.size(); ++m)
    if (!(nodes[m] > nodes[m - 1])) return false;
  return nodes.front() >= -cutoff && nodes.back() <= cutoff;
}

QuadratureGrid gauss_legendre(std::size_t M, double cutoff) {
  if (M < 2) throw Error(ErrorCode::DomainError, "quadrature needs at least two nodes");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw Error(ErrorCode::DomainError, "quadrature cutoff must be positive");

  QuadratureGrid g;
  g.cutoff = cutoff;
  g.nodes.assign(M, 0.0);
  g.weights.assign(M, 0.0);

  // Newton on P_M from the Tricomi initial guesses; roots come out descending.
  const std::size_t half = (M + 1) / 2;
  for (std::size_t r = 0; r < half; ++r) {
    double x = std::cos(std::numbers::pi * (r + 0.75) / (M + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t n = 2; n <= M; ++n) {
        double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = M * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (std::size_t n = 2; n <= M; ++n) {
        double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = M * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[r] = -x * cutoff;
    g.nodes[M - 1 - r] = x * cutoff;
    g.weights[r] = g.weights[M - 1 - r] = w * cutoff;
  }
  if (M % 2 == 1) g.nodes[M / 2] = 0.0;
  return g;
}

}  // namespace ekms::tba
