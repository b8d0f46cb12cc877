#include "ekms/hydro/few_charge.hpp"

#include <algorithm>
#include <cmath>

#include "ekms/differentiation.hpp"
#include "ekms/error.hpp"

namespace ekms::hydro {

PotentialVector few_charge_potentials(const ThermoBackend& f_model, double T, double nu, double mu) {
  if (!(T > 0.0)) throw Error(ErrorCode::DomainError, "temperature must be positive");
  PotentialVector beta;
  for (ChargeIndex k : f_model.charges()) {
    switch (k) {
      case 0: beta.set(0, -mu / T); break;
      case 1: beta.set(1, -nu / T); break;
      case 2: beta.set(2, 1.0 / T); break;
      default: throw Error(ErrorCode::UnknownChargeIndex, "few-charge closure needs charges within {0,1,2}");
    }
  }
  if (!beta.contains(2)) throw Error(ErrorCode::UnknownChargeIndex, "few-charge closure needs the energy charge");
  return beta;
}

FewChargeCurrents few_charge_currents(const ThermoBackend& f_model, double T, double nu, double mu, double G) {
  FewChargeCurrents out;
  out.beta = few_charge_potentials(f_model, T, nu, mu);
  require_admissible(f_model, out.beta);
  const bool has1 = out.beta.contains(1);

  const double f = f_model.evaluate(out.beta, {false, false}).f;
  ChargeMap q;
  if (f_model.traits().has_analytic_currents) {
    auto p = f_model.evaluate(out.beta, {false, true});
    if (p.averages) q = p.averages->q;
  }
  if (q.empty()) q = densities_from_free_energy(f_model, out.beta);

  if (out.beta.contains(0)) out.j0 = nu * q.at(0);
  out.T11 = (has1 ? nu * q.at(1) : 0.0) - T * f;
  out.j2 = nu * q.at(2) - T * nu * f - T * T * G;

  // g2(beta) = G / beta^2 - (beta^1 / beta^2) f(beta)
  auto g2 = [&](const PotentialVector& b) {
    const double fb = f_model.evaluate(b, {false, false}).f;
    const double b1 = b.contains(1) ? b.get(1) : 0.0;
    Eigen::VectorXd v(1);
    v[0] = G / b.get(2) - b1 / b.get(2) * fb;
    return v;
  };
  auto adm = [&](const PotentialVector& b) { return f_model.admissible(b); };
  DiffOptions opts;
  double worst = 0.0;
  auto compare = [&](ChargeIndex dir, double value) {
    const double fd = central_derivative(g2, out.beta, dir, opts.first_step, opts, adm)[0];
    worst = std::max(worst, std::abs(fd - value) / std::max(1.0, std::abs(value)));
  };
  if (out.j0) compare(0, *out.j0);
  if (has1) compare(1, out.T11);
  compare(2, out.j2);
  out.cross_check = worst;
  return out;
}

}  // namespace ekms::hydro
