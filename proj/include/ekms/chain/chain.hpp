#pragma once

#include <map>
#include <string>
#include <vector>

#include "ekms/chain/pauli.hpp"
#include "ekms/potential.hpp"

namespace ekms::chain {

/// Local density pattern supported on sites [0, width).
struct DensityPattern {
  ChargeIndex label = 0;
  PauliSum local;
  int width = 1;
};

struct ChainSpec {
  int N = 8;
  std::vector<DensityPattern> densities;

  /// Heisenberg chain with q0 = Z, q2 = XX + YY + ZZ, q4 = s_x . (s_{x+1} x s_{x+2}).
  static ChainSpec heisenberg(int N);
  void validate() const;
};

/// Heisenberg densities at sites 0.. for labels 0, 2, 4.
PauliSum heisenberg_density(ChargeIndex label);

struct ChainOperatorSet {
  ChainSpec spec;
  std::map<ChargeIndex, std::vector<PauliSum>> q;  // q[i][x]
  std::map<ChargeIndex, PauliSum> Q;
  std::map<ChargePair, std::vector<PauliSum>> j;   // j[(k, i)][x]
  double involution = 0.0;

  int N() const { return spec.N; }
  std::vector<ChargeIndex> labels() const;
  const PauliSum& density(ChargeIndex i, int x) const;
  const PauliSum& current(ChargeIndex k, ChargeIndex i, int x) const;
};

/// Densities, totals and (optionally) all currents. Throws MemoryBudget above 14 sites,
/// InvolutionFailure when some [Q_i, Q_j] exceeds 1e-10.
ChainOperatorSet build_chain(const ChainSpec& spec, bool with_currents = true);

/// j_ki(x) for x in [0, N) from j(x) - j(x-1) = -i[Q_k, q_i(x)], traceless.
/// Throws RingInconsistency when the commutator does not telescope.
std::vector<PauliSum> derive_current(const ChainOperatorSet& ops, ChargeIndex k, ChargeIndex i);

/// max over pairs of the largest Pauli coefficient of [Q_i, Q_j].
double involution_residual(const ChainOperatorSet& ops);

/// max over x of the largest coefficient of i[Q_k, q_i(x)] + j_ki(x) - j_ki(x-1).
double continuity_residual(const ChainOperatorSet& ops, ChargeIndex k, ChargeIndex i);

/// Relative Hilbert-Schmidt distance from o to the span of {q_l(x') : l in labels, all x'} and the identity.
double projection_residual(const ChainOperatorSet& ops, const PauliSum& o, const std::vector<ChargeIndex>& labels);

/// Signed ring coordinate in (-N/2, N/2].
int signed_position(int x, int N);

}  // namespace ekms::chain
