#pragma once

#include <functional>
#include <map>

#include <Eigen/Dense>

#include "ekms/backend.hpp"

namespace ekms {

struct DiffOptions {
  double first_step = 1e-4;   // relative step for first derivatives
  double second_step = 1e-3;  // relative step for second derivatives
  bool richardson = true;
  /// IllConditioned is raised when the Richardson estimate and the fine stencil
  /// differ by more than 100 * this value (relative to max(1, |estimate|)).
  double ill_conditioned_rel = 1e-4;
};

/// Step for coordinate i: delta * max(1, |beta^i|).
double coordinate_step(double delta, double value);

/// Central derivative of a vector-valued function along charge `dir`, with an
/// optional single level of Richardson extrapolation.
Eigen::VectorXd central_derivative(const std::function<Eigen::VectorXd(const PotentialVector&)>& fn,
                                   const PotentialVector& beta, ChargeIndex dir, double delta,
                                   const DiffOptions& opts,
                                   const std::function<bool(const PotentialVector&)>& admissible);

/// Mixed second derivative d^2 fn / dbeta^a dbeta^b (a may equal b).
Eigen::VectorXd mixed_second_derivative(const std::function<Eigen::VectorXd(const PotentialVector&)>& fn,
                                        const PotentialVector& beta, ChargeIndex a, ChargeIndex b,
                                        const DiffOptions& opts,
                                        const std::function<bool(const PotentialVector&)>& admissible);

struct CurrentsResult {
  CurrentMap values;           // returned currents (analytic when available)
  CurrentMap finite_difference;
  bool analytic = false;
  /// max |analytic - fd| / max(1, |analytic|); zero when no analytic route exists.
  double cross_check_residual = 0.0;
};

/// <j_ki> = dg_k/dbeta^i.
CurrentsResult currents_from_flux(const ThermoBackend& backend, const PotentialVector& beta,
                                  const DiffOptions& opts = {});

/// <q_i> = df/dbeta^i by finite differences.
ChargeMap densities_from_free_energy(const ThermoBackend& backend, const PotentialVector& beta,
                                     const DiffOptions& opts = {});

/// B_kij = -d<j_ki>/dbeta^j. Keyed by k; each matrix indexed in charges() order.
using BTensor = std::map<ChargeIndex, Eigen::MatrixXd>;
BTensor b_matrix(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts = {});

/// C_ij = -d<q_i>/dbeta^j; analytic when the backend provides it.
Eigen::MatrixXd static_covariance(const ThermoBackend& backend, const PotentialVector& beta,
                                  const DiffOptions& opts = {});

/// Throws DomainExceeded / UnknownChargeIndex when beta is unusable for the backend.
void require_admissible(const ThermoBackend& backend, const PotentialVector& beta);

}  // namespace ekms
