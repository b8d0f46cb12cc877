#pragma once

#include "ekms/backend.hpp"

namespace ekms::cft {

/// Boosted thermal state of a d-dimensional conformal fluid, boost along x^1.
struct CftState {
  int d = 2;
  double a = 1.0;
  double beta_rest = 1.0;
  double theta = 0.0;

  double beta1() const;  // -beta_rest sinh(theta)
  double beta2() const;  // beta_rest cosh(theta)
};

/// Normalisation of the averages that makes them the beta-derivatives of the fluxes.
/// Differentiating f = -beta2 S^{-(d+1)/2} (S = beta2^2 - beta1^2) gives exactly the
/// displayed average formulas with unit prefactor, for every d.
constexpr double consistent_a() { return 1.0; }

/// Throws TimelikeViolation unless beta2 > |beta1|.
CftState cft_from_potentials(double beta1, double beta2, int d = 2, double a = consistent_a());

struct CftAverages {
  double q1, q2, j1, j2;
};
struct CftFluxes {
  double g1, g2, f;
};

CftAverages cft_averages(const CftState& s);
CftFluxes cft_fluxes(const CftState& s);

/// Static covariance over (beta1, beta2) in closed form.
Eigen::Matrix2d cft_covariance(const CftState& s);

/// Closed-form inversion of (<q1>, <q2>) to the state. Throws InversionFailure outside the image.
CftState cft_from_densities(double q1, double q2, int d = 2);

/// Closed-form backend over charges {1 (momentum), 2 (energy)}.
class CftBackend : public ThermoBackend {
 public:
  explicit CftBackend(int d = 2);

  std::string name() const override { return "cft"; }
  std::vector<ChargeIndex> charges() const override { return {1, 2}; }
  BackendTraits traits() const override;
  BackendTolerances tolerances() const override;
  bool admissible(const PotentialVector& beta) const override;
  ThermoPoint evaluate(const PotentialVector& beta, EvalRequest request) const override;
  std::optional<Eigen::MatrixXd> covariance(const PotentialVector& beta) const override;

  int dimension() const { return d_; }

 protected:
  int d_;
};

/// Test fixture: the energy flux gets an extra kappa * beta2^{-d}, so sum_k beta^k g_k is
/// no longer state independent. Currents remain the derivatives of the modified fluxes.
class KmsViolatingCft : public CftBackend {
 public:
  KmsViolatingCft(int d, double kappa);
  std::string name() const override { return "cft-kms-violating"; }
  BackendTraits traits() const override;
  ThermoPoint evaluate(const PotentialVector& beta, EvalRequest request) const override;

 private:
  double kappa_;
};

}  // namespace ekms::cft
