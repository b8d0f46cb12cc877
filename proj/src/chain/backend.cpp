#include "ekms/chain/backend.hpp"

#include <cmath>

#include "ekms/differentiation.hpp"
#include "ekms/error.hpp"
#include "ekms/tba/quadrature.hpp"

namespace ekms::chain {

EdBackend::EdBackend(const ChainSpec& spec, bool fluxes, double beta_limit, int flux_nodes)
    : ops_(build_chain(spec)), fluxes_(fluxes), beta_limit_(beta_limit), flux_nodes_(flux_nodes) {}

BackendTraits EdBackend::traits() const {
  BackendTraits t;
  t.has_analytic_currents = true;
  t.has_momentum_charge = false;
  t.parity_symmetric = true;
  t.has_fluxes = fluxes_;
  return t;
}

BackendTolerances EdBackend::tolerances() const {
  BackendTolerances t;
  t.G = 1e-3;
  t.B = 1e-3;
  t.identity = 1e-3;
  t.C = 1e-10;
  t.g1 = 1e-9;
  return t;
}

bool EdBackend::admissible(const PotentialVector& beta) const {
  if (!beta.finite()) return false;
  for (const auto& [k, b] : beta.entries())
    if (!ops_.Q.count(k) || std::abs(b) > beta_limit_) return false;
  return true;
}

Averages EdBackend::averages(const GGEnsemble& ens) const {
  Averages a;
  const double N = ops_.N();
  for (const auto& [i, Q] : ops_.Q) a.q[i] = ens.real_average(Q) / N;
  for (const auto& [key, js] : ops_.j) a.j[key] = ens.real_average(js[0]);
  return a;
}

ThermoPoint EdBackend::evaluate(const PotentialVector& beta, EvalRequest request) const {
  require_admissible(*this, beta);
  GGEnsemble ens(ops_, beta);
  ThermoPoint p;
  p.f = -ens.log_partition() / ops_.N();
  if (request.averages) p.averages = averages(ens);
  if (request.fluxes && fluxes_) {
    // g_k = int_0^1 sum_i beta^i <j_ki>(t beta) dt
    tba::QuadratureGrid g = tba::gauss_legendre(flux_nodes_, 0.5);
    for (ChargeIndex k : charges()) p.g[k] = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const double t = g.nodes[n] + 0.5;
      Averages a = averages(GGEnsemble(ops_, beta.scaled(t)));
      for (ChargeIndex k : charges())
        for (const auto& [i, b] : beta.entries()) p.g[k] += g.weights[n] * b * a.j.at({k, i});
    }
  }
  return p;
}

std::optional<Eigen::MatrixXd> EdBackend::covariance(const PotentialVector& beta) const {
  require_admissible(*this, beta);
  GGEnsemble ens(ops_, beta);
  const auto labels = charges();
  const std::size_t n = labels.size();
  std::vector<double> mean(n);
  for (std::size_t a = 0; a < n; ++a) mean[a] = ens.real_average(ops_.Q.at(labels[a]));
  Eigen::MatrixXd C(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      C(a, b) = C(b, a) =
          (ens.real_average(ops_.Q.at(labels[a]) * ops_.Q.at(labels[b])) - mean[a] * mean[b]) / ops_.N();
  return C;
}

}  // namespace ekms::chain
