#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ekms {

/// Label of a conserved charge (0 = number, 1 = momentum, 2 = energy, 4 = quartic, ...).
using ChargeIndex = int;

/// Ordered multiplet of Lagrange parameters beta^i, one per declared charge.
class PotentialVector {
 public:
  PotentialVector() = default;
  PotentialVector(std::initializer_list<std::pair<const ChargeIndex, double>> init) : entries_(init) {}
  explicit PotentialVector(std::map<ChargeIndex, double> entries) : entries_(std::move(entries)) {}

  /// Zero-filled vector over the given index set.
  static PotentialVector zeros(const std::vector<ChargeIndex>& charges);

  double get(ChargeIndex i) const;
  void set(ChargeIndex i, double value) { entries_[i] = value; }
  bool contains(ChargeIndex i) const { return entries_.count(i) != 0; }

  const std::map<ChargeIndex, double>& entries() const { return entries_; }
  std::vector<ChargeIndex> indices() const;
  std::size_t size() const { return entries_.size(); }

  bool finite() const;
  PotentialVector shifted(ChargeIndex i, double delta) const;
  PotentialVector scaled(double factor) const;

  /// "2=0.5,0=-0.1" style rendering, also accepted by parse().
  std::string to_string() const;
  static PotentialVector parse(const std::string& text);

  friend bool operator==(const PotentialVector&, const PotentialVector&) = default;

 private:
  std::map<ChargeIndex, double> entries_;
};

using ChargePair = std::pair<ChargeIndex, ChargeIndex>;

/// Maps keyed by charge labels. CurrentMap holds <j_ki> under key (k, i).
using ChargeMap = std::map<ChargeIndex, double>;
using CurrentMap = std::map<ChargePair, double>;

}  // namespace ekms
