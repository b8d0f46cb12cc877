#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ekms/potential.hpp"

namespace ekms {

struct BackendTraits {
  bool has_analytic_currents = false;
  bool has_momentum_charge = false;
  bool parity_symmetric = false;
  /// False when the backend cannot produce g_k (then flux-based identities are skipped).
  bool has_fluxes = true;
  ChargeIndex momentum_index = 1;
};

/// Per-backend acceptance tolerances, all relative.
struct BackendTolerances {
  double G = 1e-6;        // EKMS contraction
  double B = 1e-6;        // B symmetry
  double identity = 1e-6; // identities (a)-(d)
  double C = 1e-8;        // convexity (smallest eigenvalue of C)
  double g1 = 1e-9;       // g_momentum = f
};

struct Averages {
  ChargeMap q;    // <q_i>
  CurrentMap j;   // <j_ki>, key (k, i)
};

struct ThermoPoint {
  double f = 0.0;
  ChargeMap g;                       // empty when the backend has no fluxes
  std::optional<Averages> averages;  // filled only on request and when analytic
};

struct EvalRequest {
  bool fluxes = true;
  bool averages = false;
};

/// Thermodynamic backend contract. Implementations are pure: every call is a
/// function of its arguments only, so concurrent use is safe.
class ThermoBackend {
 public:
  virtual ~ThermoBackend() = default;

  virtual std::string name() const = 0;
  virtual std::vector<ChargeIndex> charges() const = 0;
  virtual BackendTraits traits() const = 0;
  virtual BackendTolerances tolerances() const { return {}; }

  virtual bool admissible(const PotentialVector& beta) const = 0;

  virtual ThermoPoint evaluate(const PotentialVector& beta, EvalRequest request) const = 0;

  /// Analytic static covariance C_ij = -d<q_i>/dbeta^j in charges() order, if known.
  virtual std::optional<Eigen::MatrixXd> covariance(const PotentialVector&) const { return std::nullopt; }
};

}  // namespace ekms
