#include "ekms/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ekms {

double entropy_density(const PotentialVector& beta, const ChargeMap& q, double f) {
  double s = 0.0;
  for (const auto& [i, b] : beta.entries()) s += b * q.at(i);
  return s - f;
}

ChargeMap entropy_currents(const PotentialVector& beta, const CurrentMap& j, const ChargeMap& g) {
  ChargeMap out;
  for (const auto& [k, gk] : g) {
    double acc = 0.0;
    for (const auto& [i, b] : beta.entries()) acc += b * j.at({k, i});
    out[k] = acc - gk;
  }
  return out;
}

ThermoReport assemble_report(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts) {
  require_admissible(backend, beta);
  const BackendTraits traits = backend.traits();

  ThermoReport r;
  r.backend = backend.name();
  r.charges = backend.charges();
  r.beta = beta;
  r.has_fluxes = traits.has_fluxes;

  ThermoPoint point = backend.evaluate(beta, {.fluxes = traits.has_fluxes, .averages = traits.has_analytic_currents});
  r.f = point.f;
  r.g = point.g;

  if (point.averages) {
    r.q_avg = point.averages->q;
  } else {
    r.q_avg = densities_from_free_energy(backend, beta, opts);
  }

  if (traits.has_fluxes) {
    CurrentsResult currents = currents_from_flux(backend, beta, opts);
    r.j_avg = currents.values;
    r.current_cross_check = currents.cross_check_residual;
  } else if (point.averages) {
    r.j_avg = point.averages->j;
  }

  r.C = static_covariance(backend, beta, opts);
  r.B = b_matrix(backend, beta, opts);
  r.s = entropy_density(beta, r.q_avg, r.f);
  if (traits.has_fluxes) {
    r.js = entropy_currents(beta, r.j_avg, r.g);
    for (const auto& [k, b] : beta.entries()) r.G_estimate += b * r.g.at(k);
  }
  return r;
}

CheckReport make_check(std::string identity, double residual, double tolerance, std::vector<double> samples,
                       std::string note) {
  CheckReport c;
  c.identity = std::move(identity);
  c.residual = residual;
  c.tolerance = tolerance;
  c.pass = std::isfinite(residual) && residual <= tolerance;
  c.samples = std::move(samples);
  c.note = std::move(note);
  return c;
}

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json j = {{"identity", report.identity},
                      {"residual", report.residual},
                      {"tolerance", report.tolerance},
                      {"pass", report.pass},
                      {"samples", report.samples}};
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json charge_map_json(const ChargeMap& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [i, v] : m) j[std::to_string(i)] = v;
  return j;
}

}  // namespace

nlohmann::json to_json(const ThermoReport& r) {
  nlohmann::json j;
  j["backend"] = r.backend;
  j["charges"] = r.charges;
  j["beta"] = charge_map_json(r.beta.entries());
  j["f"] = r.f;
  j["g"] = charge_map_json(r.g);
  j["q"] = charge_map_json(r.q_avg);
  nlohmann::json currents = nlohmann::json::array();
  for (const auto& [key, v] : r.j_avg) currents.push_back({{"k", key.first}, {"i", key.second}, {"value", v}});
  j["j"] = currents;
  j["C"] = matrix_json(r.C);
  nlohmann::json b = nlohmann::json::object();
  for (const auto& [k, m] : r.B) b[std::to_string(k)] = matrix_json(m);
  j["B"] = b;
  j["s"] = r.s;
  j["js"] = charge_map_json(r.js);
  j["G_estimate"] = r.G_estimate;
  j["has_fluxes"] = r.has_fluxes;
  j["current_cross_check"] = r.current_cross_check;
  return j;
}

std::string to_csv(const ThermoReport& r) {
  std::ostringstream out;
  out << "k,i,j_ki,q_i,g_k,js_k\n";
  char buf[256];
  for (const auto& [key, v] : r.j_avg) {
    auto [k, i] = key;
    double gk = r.g.count(k) ? r.g.at(k) : std::nan("");
    double jsk = r.js.count(k) ? r.js.at(k) : std::nan("");
    double qi = r.q_avg.count(i) ? r.q_avg.at(i) : std::nan("");
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g\n", k, i, v, qi, gk, jsk);
    out << buf;
  }
  return out.str();
}

}  // namespace ekms
