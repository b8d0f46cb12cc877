#pragma once

#include <map>
#include <string>
#include <vector>

#include "ekms/potential.hpp"

namespace ekms::hydro {

/// Periodic grid of cell centres x_m = (m + 1/2) dx on [0, length).
struct Grid {
  int cells = 64;
  double length = 1.0;

  double dx() const { return length / cells; }
  double x(int m) const { return (m + 0.5) * dx(); }
};

/// Smooth periodic building block of a field profile.
struct Primitive {
  enum class Kind { Constant, Cosine, Bump };
  Kind kind = Kind::Constant;
  double amplitude = 0.0;
  double mode = 1.0;     // Cosine: wave number in units of 2 pi / length
  double phase = 0.0;    // Cosine: phase; Bump: centre
  double width = 0.1;    // Bump: width

  double value(double x, double length) const;
  double derivative(double x, double length) const;
};

/// u^k(x) as sums of primitives per charge, sampled on a grid.
struct FieldProfile {
  std::map<ChargeIndex, std::vector<Primitive>> terms;

  double value(ChargeIndex k, double x, double length) const;
  double derivative(ChargeIndex k, double x, double length) const;
  std::vector<ChargeIndex> charges() const;
  /// Samples at cell centres, per charge.
  std::map<ChargeIndex, std::vector<double>> sample(const Grid& g) const;
  /// Largest |du^k/dx| over cell centres.
  double max_gradient(const Grid& g) const;
  /// Finite everywhere and u^energy > 0 on every cell.
  void validate(const Grid& g, ChargeIndex energy = 2) const;

  static FieldProfile constant(const std::map<ChargeIndex, double>& values);
};

Primitive parse_primitive(const std::string& text);

}  // namespace ekms::hydro
