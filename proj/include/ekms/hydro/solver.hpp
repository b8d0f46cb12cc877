#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ekms/backend.hpp"
#include "ekms/hydro/field.hpp"
#include "json.hpp"

namespace ekms::hydro {

enum class FluxScheme { Central, LocalLaxFriedrichs };

FluxScheme parse_scheme(const std::string& name);
std::string to_string(FluxScheme scheme);

struct InvertOptions {
  double tol = 1e-10;  // on max |<q>(beta) - q| / max(1, max |q|)
  int max_iters = 50;
};

/// Averages (densities, and currents when asked) through the cheapest route the backend offers.
Averages cell_averages(const ThermoBackend& backend, const PotentialVector& beta, bool currents = true);

/// Newton solve of <q>(beta) = q_cell with Jacobian -C and backtracking.
/// `cell` only labels the error message.
PotentialVector invert_state(const ThermoBackend& backend, const ChargeMap& q_cell, const PotentialVector& guess,
                             const InvertOptions& opts = {}, int cell = -1);

struct HydroState {
  Grid grid;
  std::vector<ChargeIndex> charges;
  Eigen::MatrixXd q;     // cells x charges
  Eigen::MatrixXd beta;  // cached potentials, same shape
  double t = 0.0;

  PotentialVector beta_at(int m) const;
  ChargeMap q_at(int m) const;
  /// Integral of each density over the periodic domain.
  Eigen::VectorXd totals() const;
};

HydroState state_from_potentials(const ThermoBackend& backend, const Grid& grid,
                                 const std::function<PotentialVector(double)>& beta_of_x);

/// Thermal family beta^k = beta_bar u^k; with charge 0 present beta^0 = beta_bar (u^0 - mu_bar).
HydroState stationary_state(const ThermoBackend& backend, const Grid& grid, const FieldProfile& fields,
                            double beta_bar, double mu_bar = 0.0);

/// Least-squares distance of the cached potentials from the thermal family, relative to max |beta|.
double thermal_family_residual(const HydroState& state, const FieldProfile& fields);

struct SolverOptions {
  FluxScheme scheme = FluxScheme::Central;
  double cfl = 0.5;
  InvertOptions invert;
  bool enforce_cfl = true;
};

struct RhsResult {
  Eigen::MatrixXd dq;     // cells x charges
  Eigen::VectorXd source; // integral over x of -(d_x u^k) <j_ik>, per charge
};

class Solver {
 public:
  Solver(const ThermoBackend& backend, FieldProfile fields, SolverOptions opts = {});

  /// Re-inverts every cell (cached beta is the Newton guess and is updated), then evaluates
  /// -d_x(u^k <j_ki>) - (d_x u^k) <j_ik>.
  RhsResult rhs(HydroState& state) const;

  /// Spectral radius of sum_k u^k B_k C^{-1} in each cell.
  Eigen::VectorXd local_speeds(const HydroState& state) const;

  const FieldProfile& fields() const { return fields_; }
  const SolverOptions& options() const { return opts_; }
  const ThermoBackend& backend() const { return backend_; }

  /// Entropy density s per cell from the cached potentials.
  Eigen::VectorXd entropy(const HydroState& state) const;
  /// Entropy flux u^k js_k per cell.
  Eigen::VectorXd entropy_flux(const HydroState& state) const;

  /// Local speeds used by the Lax-Friedrichs dissipation; refreshed once per step.
  void set_dissipation_speeds(Eigen::VectorXd speeds) { speeds_ = std::move(speeds); }

 private:
  const ThermoBackend& backend_;
  FieldProfile fields_;
  SolverOptions opts_;
  Eigen::VectorXd speeds_;
};

struct Snapshot {
  double t = 0.0;
  Eigen::MatrixXd q;
  Eigen::MatrixXd beta;
  Eigen::VectorXd s;
  Eigen::VectorXd entropy_flux;
};

struct EvolveOptions {
  double dt = 0.0;      // <= 0: chosen from the initial CFL bound
  double t_end = 1.0;
  int record_every = 0; // 0 records only the first and last state
};

struct Trajectory {
  Grid grid;
  std::vector<ChargeIndex> charges;
  std::string backend;
  FluxScheme scheme = FluxScheme::Central;
  double dt = 0.0;
  int steps = 0;
  double v_max = 0.0;                 // largest speed seen during the run
  std::vector<double> times;          // one entry per step, including t = 0
  std::vector<double> total_entropy;  // integral of s at those times
  std::vector<Eigen::VectorXd> totals;
  Eigen::VectorXd integrated_source;  // time integral of RhsResult::source
  std::vector<Snapshot> snapshots;
  HydroState final_state;
};

/// RK4 method of lines. Throws CFLViolation when dt exceeds cfl * dx / v_max at any step and
/// InversionFailure (with cell index) when a stage leaves the thermodynamic domain.
Trajectory evolve(const Solver& solver, HydroState state, const EvolveOptions& opts);

struct EntropyBudget {
  double max_rate = 0.0;  // max over steps of |d/dt integral s|
  double delta = 0.0;     // |S(t_end) - S(0)|
  double max_change = 0.0;  // max over t of |S(t) - S(0)|
  double initial = 0.0;
};

EntropyBudget entropy_budget(const Trajectory& traj);

/// max_i |Delta Q_i - integrated source_i| / max(1, |Q_i(0)|).
double charge_budget_residual(const Trajectory& traj);

/// Max over cells and charges of |q(t_end) - q(0)|.
double max_drift(const Trajectory& traj);

/// Orders log(e_a / e_b) / log(h_a / h_b) for consecutive refinements.
std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err);

/// Flux Jacobian sum_k u^k B_k C^{-1} at a homogeneous state with the fields taken at x.
Eigen::MatrixXd flux_jacobian(const Solver& solver, const PotentialVector& beta, double x, double length);

struct SoundWave {
  double predicted = 0.0;  // largest real eigenvalue of the flux Jacobian
  double measured = 0.0;   // from the phase of the evolved mode
  double relative_error = 0.0;
};

/// Evolves a small right-moving linear mode (wave number 2 pi / length) on a homogeneous
/// background under constant fields and reads off its speed.
SoundWave sound_wave_test(const Solver& solver, const Grid& grid, const PotentialVector& background,
                          double amplitude, double t_end, double dt = 0.0);

/// One CSV per snapshot: x, q_i..., beta_i..., s.
std::string snapshot_csv(const Trajectory& traj, const Snapshot& snap);
nlohmann::json manifest(const Trajectory& traj);

}  // namespace ekms::hydro
