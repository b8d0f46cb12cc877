#pragma once

#include <optional>

#include "ekms/backend.hpp"

namespace ekms::hydro {

/// Currents of number (0), momentum (1) and energy (2) in a boosted state at temperature T,
/// velocity nu and chemical potential mu, i.e. beta^2 = 1/T, beta^1 = -nu/T, beta^0 = -mu/T.
struct FewChargeCurrents {
  PotentialVector beta;
  std::optional<double> j0;  // only when the model carries charge 0
  double T11 = 0.0;
  double j2 = 0.0;
  /// Max relative deviation from d(TG + nu f)/dbeta^i by central differences.
  double cross_check = 0.0;
};

PotentialVector few_charge_potentials(const ThermoBackend& f_model, double T, double nu, double mu);

FewChargeCurrents few_charge_currents(const ThermoBackend& f_model, double T, double nu, double mu, double G);

}  // namespace ekms::hydro
