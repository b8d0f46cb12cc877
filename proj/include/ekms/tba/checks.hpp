#pragma once

#include "ekms/report.hpp"
#include "ekms/tba/model.hpp"
#include "ekms/tba/solver.hpp"

namespace ekms::tba {

/// Cutoff adequacy: eps grows at both edges and the neglected tail is below tol.
CheckReport check_asymptotic(const TbaModel& model, const PseudoEnergy& pe, double tol = 1e-10);

/// d phi(theta', theta)/d theta is antisymmetric under theta <-> theta' on the grid nodes.
CheckReport check_unitarity(const TbaModel& model, const QuadratureGrid& grid, double tol = 1e-12);

/// sum_k beta^k g_k against its rewriting through eps' and the kernel derivative;
/// passes when the two agree and both are small relative to max_k |beta^k g_k|.
CheckReport check_ekms_chain(const TbaModel& model, const PseudoEnergy& pe, double tol = 1e-7);

/// Occupations within [0, 1] (fermions) or non-negative (classical).
CheckReport check_occupation_bounds(const TbaModel& model, const PseudoEnergy& pe);

}  // namespace ekms::tba
