#pragma once

#include <vector>

#include "ekms/backend.hpp"
#include "ekms/report.hpp"

namespace ekms {

/// EKMS contraction G = sum_k beta^k g_k over several states. Passes when G is
/// state independent (stdev) and, for parity-symmetric backends, when |G| is
/// below tolerance relative to max_k |beta^k g_k| for every sample.
CheckReport check_ekms(const ThermoBackend& backend, const std::vector<PotentialVector>& beta_samples, double tol);

/// Identities (a)-(d): differenced g_i = -beta^k <j_ki>, the index swap relation
/// <j_ij + j_ji> = beta^k B_kij, beta^k beta^i <j_ki> = -G and beta^k js_k = -2G.
std::vector<CheckReport> check_identities(const ThermoBackend& backend, const PotentialVector& beta, double tol,
                                          const DiffOptions& opts = {});

/// Same, from precomputed reports at the state and at a nearby second state.
std::vector<CheckReport> check_identities(const ThermoReport& report, const ThermoReport& second,
                                          const BackendTraits& traits, double tol);

/// Second state used by identity (a): beta scaled towards the origin, or away from it when that leaves the domain.
PotentialVector companion_state(const ThermoBackend& backend, const PotentialVector& beta);

CheckReport check_b_symmetry(const ThermoReport& report, double tol);
CheckReport check_g1_equals_f(const ThermoReport& report, ChargeIndex momentum, double tol);
CheckReport check_convexity(const ThermoReport& report, double tol);

/// Stored s and js reproduce bit-exactly from the stored fields.
CheckReport check_report_consistency(const ThermoReport& report);

}  // namespace ekms
