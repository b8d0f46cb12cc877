#pragma once

#include "ekms/backend.hpp"
#include "ekms/chain/ensemble.hpp"

namespace ekms::chain {

/// Finite-N Gibbs states of a chain as a thermodynamic backend: f = -log Z / N,
/// <q_i> = <Q_i> / N and <j_ki> = <j_ki(0)>. Fluxes, when enabled, are obtained by
/// integrating beta^i <j_ki> along the ray from beta = 0.
class EdBackend : public ThermoBackend {
 public:
  explicit EdBackend(const ChainSpec& spec, bool fluxes = false, double beta_limit = 0.5, int flux_nodes = 8);

  std::string name() const override { return "ed-chain"; }
  std::vector<ChargeIndex> charges() const override { return ops_.labels(); }
  BackendTraits traits() const override;
  BackendTolerances tolerances() const override;
  bool admissible(const PotentialVector& beta) const override;
  ThermoPoint evaluate(const PotentialVector& beta, EvalRequest request) const override;
  std::optional<Eigen::MatrixXd> covariance(const PotentialVector& beta) const override;

  const ChainOperatorSet& operators() const { return ops_; }
  GGEnsemble ensemble(const PotentialVector& beta) const { return GGEnsemble(ops_, beta); }

 private:
  Averages averages(const GGEnsemble& ens) const;

  ChainOperatorSet ops_;
  bool fluxes_;
  double beta_limit_;
  int flux_nodes_;
};

}  // namespace ekms::chain
