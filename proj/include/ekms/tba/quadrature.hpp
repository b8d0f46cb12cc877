#pragma once

#include <cstddef>
#include <vector>

namespace ekms::tba {

/// Gauss-Legendre rule on [-cutoff, cutoff].
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double cutoff = 0.0;

  std::size_t size() const { return nodes.size(); }
  bool valid() const;
};

QuadratureGrid gauss_legendre(std::size_t M, double cutoff);

}  // namespace ekms::tba
