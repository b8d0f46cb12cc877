#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ekms/backend.hpp"
#include "ekms/tba/model.hpp"
#include "ekms/tba/quadrature.hpp"

namespace ekms::tba {

struct SolverOptions {
  std::size_t nodes = 400;
  /// Fixed cutoff when positive; otherwise chosen from the driving term and expanded.
  double cutoff = 0.0;
  double tol = 1e-12;
  double damping = 0.5;
  std::size_t max_iters = 10000;
  /// Halve the damping whenever the residual grows.
  bool adaptive_damping = true;
  /// Cutoff expansion target for |F(eps(+-cutoff))|.
  double edge_tol = 1e-14;
  /// Cutoff expansion target for the neglected tail estimate.
  double tail_tol = 1e-12;
};

struct PseudoEnergy {
  QuadratureGrid grid;
  std::vector<double> eps;
  PotentialVector beta;
  bool converged = false;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// sum_i beta^i h_i(theta) and its theta derivative.
double driving_term(const PotentialVector& beta, double theta);
double driving_slope(const PotentialVector& beta, double theta);

/// Solve on a fixed grid.
PseudoEnergy solve_pseudo_energy(const TbaModel& model, const PotentialVector& beta, const QuadratureGrid& grid,
                                 const SolverOptions& opts = {});
/// Solve with cutoff selection (or opts.cutoff when positive).
PseudoEnergy solve_pseudo_energy(const TbaModel& model, const PotentialVector& beta, const SolverOptions& opts = {});

/// eps at an arbitrary theta from the converged node values.
double interpolate(const TbaModel& model, const PseudoEnergy& pe, double theta);
/// d eps / d theta at an arbitrary theta.
double slope(const TbaModel& model, const PseudoEnergy& pe, double theta);

/// Neglected-tail estimate used for cutoff adequacy.
double tail_estimate(const TbaModel& model, const PseudoEnergy& pe);

/// g_k = prefactor * int h_k'(theta) F(eps(theta)); g_0 is identically zero.
double free_energy_flux(const TbaModel& model, const PseudoEnergy& pe, ChargeIndex k);

/// Free energy by integration by parts, independent of the g_1 quadrature.
double free_energy(const TbaModel& model, const PseudoEnergy& pe);

std::vector<double> occupations(const TbaModel& model, const PseudoEnergy& pe);

/// Dressing with occupations: h_dr = h + prefactor * int phi n h_dr.
class Dresser {
 public:
  Dresser(const TbaModel& model, const PseudoEnergy& pe);
  std::vector<double> operator()(const std::vector<double>& h) const;

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

std::vector<double> dress(const TbaModel& model, const PseudoEnergy& pe, const std::vector<double>& h);

/// Averages from dressed quantities: <q_i> and <j_ki>.
Averages analytic_averages(const TbaModel& model, const PseudoEnergy& pe);

/// C_ij in model.charges order.
Eigen::MatrixXd analytic_covariance(const TbaModel& model, const PseudoEnergy& pe);

/// "theta,epsilon,occupation" rows.
std::string pseudo_energy_csv(const TbaModel& model, const PseudoEnergy& pe);

}  // namespace ekms::tba
