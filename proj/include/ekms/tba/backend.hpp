#pragma once

#include "ekms/backend.hpp"
#include "ekms/tba/model.hpp"
#include "ekms/tba/solver.hpp"

namespace ekms::tba {

class TbaBackend : public ThermoBackend {
 public:
  explicit TbaBackend(TbaModel model, SolverOptions opts = {}, double beta0_limit = 5.0);

  std::string name() const override { return model_.name; }
  std::vector<ChargeIndex> charges() const override { return model_.charges; }
  BackendTraits traits() const override;
  BackendTolerances tolerances() const override;
  bool admissible(const PotentialVector& beta) const override;
  ThermoPoint evaluate(const PotentialVector& beta, EvalRequest request) const override;
  std::optional<Eigen::MatrixXd> covariance(const PotentialVector& beta) const override;

  const TbaModel& model() const { return model_; }
  const SolverOptions& options() const { return opts_; }
  PseudoEnergy solve(const PotentialVector& beta) const;

 private:
  TbaModel model_;
  SolverOptions opts_;
  double beta0_limit_;
};

}  // namespace ekms::tba
