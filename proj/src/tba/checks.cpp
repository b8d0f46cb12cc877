#include "ekms/tba/checks.hpp"

#include <algorithm>
#include <cmath>

namespace ekms::tba {

CheckReport check_asymptotic(const TbaModel& model, const PseudoEnergy& pe, double tol) {
  const double L = pe.grid.cutoff;
  const double up = slope(model, pe, L), down = slope(model, pe, -L);
  const double F_up = free_function(model.statistics, interpolate(model, pe, L));
  const double F_down = free_function(model.statistics, interpolate(model, pe, -L));
  double residual = tail_estimate(model, pe);
  std::string note;
  if (!(up > 0.0 && down < 0.0)) {
    residual = std::max(residual, 1.0);
    note = "pseudo-energy not increasing towards the edges";
  } else if (residual > tol) {
    note = "cutoff too small for this state; increase the cutoff";
  }
  return make_check("asymptotic", residual, tol, {L, F_down, F_up, down, up}, note);
}

CheckReport check_unitarity(const TbaModel& model, const QuadratureGrid& grid, double tol) {
  double worst = 0.0, scale = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a)
    for (std::size_t b = a; b < grid.size(); ++b) {
      double d1 = model.dphi(grid.nodes[a], grid.nodes[b]);
      double d2 = model.dphi(grid.nodes[b], grid.nodes[a]);
      worst = std::max(worst, std::abs(d1 + d2));
      scale = std::max({scale, std::abs(d1), std::abs(d2)});
    }
  double residual = worst / std::max(1.0, scale);
  return make_check("unitarity", residual, tol, {worst, scale}, "max |D(t',t) + D(t,t')| / max(1, max |D|)");
}

CheckReport check_ekms_chain(const TbaModel& model, const PseudoEnergy& pe, double tol) {
  double direct = 0.0, scale = 0.0;
  for (const auto& [k, b] : pe.beta.entries()) {
    double term = b * free_energy_flux(model, pe, k);
    direct += term;
    scale = std::max(scale, std::abs(term));
  }

  const auto& g = pe.grid;
  const double pref = model.measure_prefactor;
  std::vector<double> F(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) F[m] = free_function(model.statistics, pe.eps[m]);
  double total_derivative = 0.0, double_integral = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    total_derivative += g.weights[m] * slope(model, pe, g.nodes[m]) * F[m];
    if (!model.zero_kernel)
      for (std::size_t p = 0; p < g.size(); ++p)
        double_integral += g.weights[m] * g.weights[p] * model.dphi(g.nodes[p], g.nodes[m]) * F[p] * F[m];
  }
  const double chain = pref * total_derivative - pref * pref * double_integral;

  double s = scale > 0.0 ? scale : 1.0;
  double residual = std::max({std::abs(direct - chain) / s, std::abs(direct) / s, std::abs(chain) / s});
  return make_check("ekms-chain", residual, tol, {direct, chain, pref * total_derivative, pref * pref * double_integral});
}

CheckReport check_occupation_bounds(const TbaModel& model, const PseudoEnergy& pe) {
  double worst = 0.0;
  for (double n : occupations(model, pe)) {
    if (n < 0.0) worst = std::max(worst, -n);
    if (model.statistics == Statistics::Fermionic && n > 1.0) worst = std::max(worst, n - 1.0);
    if (!std::isfinite(n)) worst = std::numeric_limits<double>::infinity();
  }
  return make_check("occupation-bounds", worst, 0.0);
}

}  // namespace ekms::tba
