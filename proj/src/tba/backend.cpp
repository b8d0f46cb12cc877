#include "ekms/tba/backend.hpp"

#include <algorithm>
#include <cmath>

#include "ekms/differentiation.hpp"
#include "ekms/error.hpp"

namespace ekms::tba {

TbaBackend::TbaBackend(TbaModel model, SolverOptions opts, double beta0_limit)
    : model_(std::move(model)), opts_(opts), beta0_limit_(beta0_limit) {}

BackendTraits TbaBackend::traits() const {
  BackendTraits t;
  t.has_analytic_currents = true;
  t.has_momentum_charge = std::find(model_.charges.begin(), model_.charges.end(), 1) != model_.charges.end();
  t.parity_symmetric = model_.parity_symmetric;
  t.has_fluxes = true;
  t.momentum_index = 1;
  return t;
}

BackendTolerances TbaBackend::tolerances() const {
  BackendTolerances t;
  t.G = 1e-7;
  t.B = 1e-6;
  t.identity = 1e-6;
  t.C = 1e-8;
  t.g1 = 1e-9;
  return t;
}

bool TbaBackend::admissible(const PotentialVector& beta) const {
  if (!beta.finite()) return false;
  for (const auto& [k, b] : beta.entries())
    if (std::find(model_.charges.begin(), model_.charges.end(), k) == model_.charges.end()) return false;
  if (std::abs(beta.get(0)) > beta0_limit_) return false;
  ChargeIndex top = -1;
  for (const auto& [k, b] : beta.entries())
    if (b != 0.0) top = std::max(top, k);
  return top > 0 && top % 2 == 0 && beta.get(top) > 0.0;
}

PseudoEnergy TbaBackend::solve(const PotentialVector& beta) const {
  require_admissible(*this, beta);
  return solve_pseudo_energy(model_, beta, opts_);
}

ThermoPoint TbaBackend::evaluate(const PotentialVector& beta, EvalRequest request) const {
  PseudoEnergy pe = solve(beta);
  ThermoPoint p;
  p.f = free_energy(model_, pe);
  if (request.fluxes)
    for (ChargeIndex k : model_.charges) p.g[k] = free_energy_flux(model_, pe, k);
  if (request.averages) p.averages = analytic_averages(model_, pe);
  return p;
}

std::optional<Eigen::MatrixXd> TbaBackend::covariance(const PotentialVector& beta) const {
  return analytic_covariance(model_, solve(beta));
}

}  // namespace ekms::tba
