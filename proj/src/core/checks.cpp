#include "ekms/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ekms/error.hpp"

namespace ekms {

namespace {

constexpr double kTiny = 1e-300;

double safe_ratio(double num, double den) { return den > kTiny ? num / den : (num > kTiny ? num / kTiny : 0.0); }

}  // namespace

CheckReport check_ekms(const ThermoBackend& backend, const std::vector<PotentialVector>& beta_samples, double tol) {
  if (beta_samples.size() < 2)
    throw Error(ErrorCode::InsufficientSamples, "check_ekms needs at least two states");

  std::vector<double> G(beta_samples.size()), scale(beta_samples.size());
  for (std::size_t s = 0; s < beta_samples.size(); ++s) {
    require_admissible(backend, beta_samples[s]);
    ThermoPoint p = backend.evaluate(beta_samples[s], {.fluxes = true, .averages = false});
    if (p.g.empty()) throw Error(ErrorCode::DomainError, backend.name() + " has no free energy fluxes");
    double acc = 0.0, biggest = 0.0;
    for (const auto& [k, b] : beta_samples[s].entries()) {
      acc += b * p.g.at(k);
      biggest = std::max(biggest, std::abs(b * p.g.at(k)));
    }
    G[s] = acc;
    scale[s] = biggest;
  }

  const double n = static_cast<double>(G.size());
  const double mean = std::accumulate(G.begin(), G.end(), 0.0) / n;
  double var = 0.0;
  for (double x : G) var += (x - mean) * (x - mean);
  const double stdev = std::sqrt(var / (n - 1.0));
  const double mean_scale = std::accumulate(scale.begin(), scale.end(), 0.0) / n;

  double residual = safe_ratio(stdev, mean_scale);
  if (backend.traits().parity_symmetric)
    for (std::size_t s = 0; s < G.size(); ++s) residual = std::max(residual, safe_ratio(std::abs(G[s]), scale[s]));

  return make_check("ekms", residual, tol, G, "samples hold G = sum_k beta^k g_k; residual is relative to max_k |beta^k g_k|");
}

PotentialVector companion_state(const ThermoBackend& backend, const PotentialVector& beta) {
  for (double factor : {0.95, 1.05, 0.9, 1.1}) {
    PotentialVector p = beta.scaled(factor);
    if (backend.admissible(p)) return p;
  }
  throw Error(ErrorCode::DomainExceeded, "no admissible companion state near " + beta.to_string());
}

std::vector<CheckReport> check_identities(const ThermoBackend& backend, const PotentialVector& beta, double tol,
                                          const DiffOptions& opts) {
  ThermoReport r1 = assemble_report(backend, beta, opts);
  if (!backend.traits().has_fluxes) {
    ThermoReport empty;
    return check_identities(r1, empty, backend.traits(), tol);
  }
  ThermoReport r2 = assemble_report(backend, companion_state(backend, beta), opts);
  return check_identities(r1, r2, backend.traits(), tol);
}

std::vector<CheckReport> check_identities(const ThermoReport& r, const ThermoReport& second, const BackendTraits& traits,
                                          double tol) {
  std::vector<CheckReport> out;
  const auto& beta = r.beta;

  // (a) g_i + beta^k <j_ki> is state independent.
  if (traits.has_fluxes && !second.charges.empty()) {
    double worst = 0.0, scale = 0.0;
    std::vector<double> samples;
    for (ChargeIndex i : r.charges) {
      auto offset = [&](const ThermoReport& rep) {
        double contraction = 0.0;
        for (const auto& [k, b] : rep.beta.entries()) contraction += b * rep.j_avg.at({k, i});
        scale = std::max({scale, std::abs(rep.g.at(i)), std::abs(contraction)});
        return rep.g.at(i) + contraction;
      };
      double diff = offset(r) - offset(second);
      samples.push_back(diff);
      worst = std::max(worst, std::abs(diff));
    }
    out.push_back(make_check("identity-a", safe_ratio(worst, scale), tol, samples,
                             "differenced g_i + beta^k <j_ki> between two states"));
  } else {
    out.push_back(make_check("identity-a", 0.0, tol, {}, "skipped: backend has no free energy fluxes"));
  }

  // (b) <j_ij> + <j_ji> = beta^k B_kij.
  {
    double worst = 0.0, scale = 0.0;
    std::vector<double> samples;
    const auto& cs = r.charges;
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = a; b < cs.size(); ++b) {
        double lhs = r.j_avg.at({cs[a], cs[b]}) + r.j_avg.at({cs[b], cs[a]});
        double rhs = 0.0;
        for (const auto& [k, bk] : beta.entries()) {
          double term = bk * r.B.at(k)(a, b);
          rhs += term;
          scale = std::max(scale, std::abs(term));
        }
        scale = std::max({scale, std::abs(r.j_avg.at({cs[a], cs[b]})), std::abs(r.j_avg.at({cs[b], cs[a]}))});
        samples.push_back(lhs - rhs);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    out.push_back(make_check("identity-b", safe_ratio(worst, scale), tol, samples, "<j_ij + j_ji> - beta^k B_kij"));
  }

  // (c) beta^k beta^i <j_ki> = -G.
  const bool have_G = traits.has_fluxes || traits.parity_symmetric;
  if (have_G) {
    const double G = traits.has_fluxes ? r.G_estimate : 0.0;
    double lhs = 0.0, scale = std::abs(G);
    for (const auto& [k, bk] : beta.entries())
      for (const auto& [i, bi] : beta.entries()) {
        double term = bk * bi * r.j_avg.at({k, i});
        lhs += term;
        scale = std::max(scale, std::abs(term));
      }
    out.push_back(make_check("identity-c", safe_ratio(std::abs(lhs + G), scale), tol, {lhs, -G},
                             traits.has_fluxes ? "" : "G taken as 0 by parity symmetry"));
  } else {
    out.push_back(make_check("identity-c", 0.0, tol, {}, "skipped: G unknown without fluxes"));
  }

  // (d) beta^k js_k = -2G.
  if (traits.has_fluxes) {
    double lhs = 0.0, scale = 2.0 * std::abs(r.G_estimate);
    for (const auto& [k, bk] : beta.entries()) {
      lhs += bk * r.js.at(k);
      scale = std::max(scale, std::abs(bk * r.js.at(k)));
    }
    out.push_back(make_check("identity-d", safe_ratio(std::abs(lhs + 2.0 * r.G_estimate), scale), tol,
                             {lhs, -2.0 * r.G_estimate}));
  } else {
    out.push_back(make_check("identity-d", 0.0, tol, {}, "skipped: backend has no free energy fluxes"));
  }
  return out;
}

CheckReport check_b_symmetry(const ThermoReport& report, double tol) {
  double residual = 0.0;
  std::vector<double> samples;
  for (const auto& [k, Bk] : report.B) {
    double asym = (Bk - Bk.transpose()).cwiseAbs().maxCoeff();
    double r = safe_ratio(asym, Bk.cwiseAbs().maxCoeff());
    samples.push_back(r);
    residual = std::max(residual, r);
  }
  return make_check("b-symmetry", residual, tol, samples, "per k: max|B_kij - B_kji| / max|B_k|");
}

CheckReport check_g1_equals_f(const ThermoReport& report, ChargeIndex momentum, double tol) {
  auto it = report.g.find(momentum);
  if (it == report.g.end()) return make_check("g1-equals-f", 0.0, tol, {}, "skipped: no momentum charge");
  double r = safe_ratio(std::abs(it->second - report.f), std::abs(report.f));
  return make_check("g1-equals-f", r, tol, {it->second, report.f});
}

CheckReport check_convexity(const ThermoReport& report, double tol) {
  const Eigen::MatrixXd& C = report.C;
  double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  double asym = (C - C.transpose()).cwiseAbs().maxCoeff() / scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C + C.transpose()));
  double lmin = es.eigenvalues().minCoeff();
  double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
  double residual = std::max(asym, std::max(0.0, -lmin) / lmax);
  return make_check("convexity", residual, tol, {lmin, es.eigenvalues().maxCoeff(), asym});
}

CheckReport check_report_consistency(const ThermoReport& report) {
  bool ok = entropy_density(report.beta, report.q_avg, report.f) == report.s;
  if (report.has_fluxes) ok = ok && entropy_currents(report.beta, report.j_avg, report.g) == report.js;
  return make_check("report-consistency", ok ? 0.0 : 1.0, 0.0);
}

}  // namespace ekms
