#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "ekms/chain/chain.hpp"
#include "ekms/potential.hpp"

namespace ekms::chain {

/// Magnetisation sectors (or one sector when magnetisation is not conserved) and
/// translation orbits of the computational basis of an N-site ring.
struct SymmetryBasis {
  struct Sector {
    std::vector<std::uint64_t> states;
    std::vector<std::uint64_t> reps;  // orbit representatives (smallest rotation)
    std::vector<int> period;          // orbit length per representative
  };

  int N = 0;
  bool magnetisation_blocks = true;
  std::vector<Sector> sectors;
  std::vector<int> sector_of;  // per basis state
  std::vector<int> index_of;   // position within its sector
  std::vector<int> rep_of;     // representative index within its sector
  std::vector<int> shift_of;   // state = T^shift rep, shift < period

  static std::shared_ptr<const SymmetryBasis> get(int N, bool magnetisation_blocks);
  static bool allowed(int period, int k, int N) { return (k * period) % N == 0; }
};

/// true when every total charge commutes with the total magnetisation.
bool conserves_magnetisation(const ChainOperatorSet& ops);

/// Gibbs state rho = e^{-W} / tr e^{-W}, W = sum_i beta^i Q_i, from momentum-block eigensolves.
class GGEnsemble {
 public:
  struct Block {
    int k = 0;
    std::vector<int> reps;         // representative indices within the sector
    std::vector<int> position;     // representative index -> row in this block, or -1
    Eigen::MatrixXcd U;            // eigenvectors in the momentum-state basis
    Eigen::VectorXd w;             // eigenvalues of W
  };

  GGEnsemble(const ChainOperatorSet& ops, const PotentialVector& beta,
             std::size_t memory_budget_bytes = std::size_t{2} << 30);

  int N() const { return basis_->N; }
  const PotentialVector& beta() const { return beta_; }
  const SymmetryBasis& basis() const { return *basis_; }
  double log_partition() const { return log_z_; }
  double trace() const;
  /// max |rho - rho^dag|
  double hermiticity_residual() const;
  /// max |[rho, Q]| entrywise; Q must preserve the sectors.
  double commutator_residual(const PauliSum& Q) const;

  /// tr(rho o). Throws DimensionMismatch if o acts beyond the ring.
  cplx average(const PauliSum& o) const;
  /// Real part of tr(rho o) after checking the imaginary part is below 1e-13 * max(1, |tr|).
  double real_average(const PauliSum& o) const;

  /// tr(rho e^{W} o2 e^{-W} o1) from the spectral data.
  cplx kms_rhs(const PauliSum& o1, const PauliSum& o2) const;

  const Eigen::MatrixXcd& rho(int sector) const { return rho_.at(sector); }
  const std::vector<Block>& blocks(int sector) const { return blocks_.at(sector); }

 private:
  using BlockMatrix = std::vector<std::vector<Eigen::MatrixXcd>>;
  BlockMatrix momentum_blocks(const PauliSum& o, int s, int t) const;

  /// Per block: rho e^{W} and e^{-W} in the momentum basis, built on first KMS use.
  struct SpectralCache {
    std::once_flag once;
    std::vector<std::vector<Eigen::MatrixXcd>> pplus, eminus;
  };
  const SpectralCache& spectral() const;

  PotentialVector beta_;
  std::shared_ptr<const SymmetryBasis> basis_;
  std::vector<std::vector<Block>> blocks_;
  std::vector<Eigen::MatrixXcd> rho_;
  double log_z_ = 0.0;
  double w_min_ = 0.0;
  std::shared_ptr<SpectralCache> spectral_ = std::make_shared<SpectralCache>();
};

}  // namespace ekms::chain
