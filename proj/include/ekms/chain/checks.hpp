#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "ekms/chain/ensemble.hpp"
#include "ekms/report.hpp"

namespace ekms::chain {

/// tr(rho o1 o2) against tr(rho e^{W} o2 e^{-W} o1) from the spectral data.
CheckReport check_kms(const GGEnsemble& ens, const PauliSum& o1, const PauliSum& o2, double tol = 1e-10);

/// Tangent relation -d<o>/dbeta^i = <o Q_i>^c. The shifted ensembles are built on first
/// use per direction and reused for later observables.
class TangentProbe {
 public:
  TangentProbe(const ChainOperatorSet& ops, const GGEnsemble& base, double delta = 1e-5);
  CheckReport check(const PauliSum& o, ChargeIndex i, double tol = 1e-8) const;
  /// Central finite difference of <o> along charge i.
  double finite_difference(const PauliSum& o, ChargeIndex i) const;
  /// <o Q_i> - <o><Q_i>.
  double connected(const PauliSum& o, ChargeIndex i) const;

 private:
  const std::pair<GGEnsemble, GGEnsemble>& shifted(ChargeIndex i) const;

  const ChainOperatorSet& ops_;
  const GGEnsemble& base_;
  double delta_;
  mutable std::map<ChargeIndex, std::pair<GGEnsemble, GGEnsemble>> cache_;
};

struct FirstMoment {
  double lhs = 0.0;  // <j_ij(0) + j_ji(0)>
  double rhs = 0.0;  // -i sum_x x <[q_i(x), q_j(0)]>
  double residual = 0.0;
  bool touches_cut = false;
};

/// Both sides of the first-moment relation with signed ring positions; no site-count gate.
FirstMoment first_moment(const ChainOperatorSet& ops, const GGEnsemble& ens, ChargeIndex i, ChargeIndex j);

/// Report form: requires N >= 10 and |beta| <= 0.5 (DomainExceeded otherwise).
CheckReport check_first_moment(const ChainOperatorSet& ops, const GGEnsemble& ens, ChargeIndex i, ChargeIndex j,
                               double tol = 1e-3);

CheckReport check_involution(const ChainOperatorSet& ops, double tol = 1e-11);
CheckReport check_continuity(const ChainOperatorSet& ops, double tol = 1e-12);
/// Derived j_22(0) against span{q_4, q_2, q_0, 1}.
CheckReport check_energy_current(const ChainOperatorSet& ops, double tol = 1e-10);

/// Random Hermitian observable on one or two adjacent sites at a random position.
PauliSum random_local_observable(int N, std::mt19937_64& rng);

/// Residual per site count and whether it strictly decreases along the scan.
struct SizeScan {
  std::vector<int> sizes;
  std::vector<double> residuals;
  bool monotone = false;
};

}  // namespace ekms::chain
