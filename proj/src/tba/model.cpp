#include "ekms/tba/model.hpp"

#include <cmath>
#include <numbers>

#include "ekms/error.hpp"

namespace ekms::tba {

double free_function(Statistics s, double eps) {
  if (s == Statistics::Classical) return -std::exp(-eps);
  return eps > 0 ? -std::log1p(std::exp(-eps)) : eps - std::log1p(std::exp(eps));
}

double occupation(Statistics s, double eps) {
  if (s == Statistics::Classical) return std::exp(-eps);
  if (eps > 0) {
    double e = std::exp(-eps);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(eps));
}

double occupation_slope(Statistics s, double eps) {
  double n = occupation(s, eps);
  return s == Statistics::Classical ? n : n * (1.0 - n);
}

bool supported_charge(ChargeIndex k) { return k >= 0 && k <= 8; }

double one_particle(ChargeIndex k, double theta) {
  if (!supported_charge(k)) throw Error(ErrorCode::UnknownChargeIndex, "no one-particle eigenvalue for charge " + std::to_string(k));
  if (k == 0) return 1.0;
  return std::pow(theta, k) / k;
}

double one_particle_derivative(ChargeIndex k, double theta) {
  if (!supported_charge(k)) throw Error(ErrorCode::UnknownChargeIndex, "no one-particle eigenvalue for charge " + std::to_string(k));
  if (k == 0) return 0.0;
  return std::pow(theta, k - 1);
}

double TbaModel::dphi(double theta_p, double theta) const {
  if (zero_kernel) return 0.0;
  if (kernel_dtheta) return kernel_dtheta(theta_p, theta);
  const double h = 1e-5 * std::max(1.0, std::abs(theta));
  return (kernel(theta_p, theta + h) - kernel(theta_p, theta - h)) / (2.0 * h);
}

TbaModel free_classical(std::vector<ChargeIndex> charges) {
  TbaModel m;
  m.name = "free-classical";
  m.statistics = Statistics::Classical;
  m.charges = std::move(charges);
  m.measure_prefactor = 1.0;
  m.zero_kernel = true;
  return m;
}

TbaModel free_fermion(std::vector<ChargeIndex> charges) {
  TbaModel m;
  m.name = "free-fermion";
  m.statistics = Statistics::Fermionic;
  m.charges = std::move(charges);
  m.measure_prefactor = 1.0 / (2.0 * std::numbers::pi);
  m.zero_kernel = true;
  return m;
}

TbaModel hard_rods(double a, std::vector<ChargeIndex> charges) {
  TbaModel m;
  m.name = "hard-rods";
  m.statistics = Statistics::Classical;
  m.charges = std::move(charges);
  m.measure_prefactor = 1.0;
  m.parameters["a"] = a;
  m.zero_kernel = (a == 0.0);
  m.kernel = [a](double, double) { return -a; };
  m.kernel_dtheta = [](double, double) { return 0.0; };
  return m;
}

TbaModel lieb_liniger(double c, std::vector<ChargeIndex> charges) {
  if (!(c > 0.0)) throw Error(ErrorCode::DomainError, "Lieb-Liniger coupling must be positive");
  TbaModel m;
  m.name = "lieb-liniger";
  m.statistics = Statistics::Fermionic;
  m.charges = std::move(charges);
  m.measure_prefactor = 1.0 / (2.0 * std::numbers::pi);
  m.parameters["c"] = c;
  m.kernel = [c](double tp, double t) {
    double u = t - tp;
    return 2.0 * c / (u * u + c * c);
  };
  m.kernel_dtheta = [c](double tp, double t) {
    double u = t - tp;
    double d = u * u + c * c;
    return -4.0 * c * u / (d * d);
  };
  return m;
}

std::vector<std::string> registered_models() { return {"free-classical", "free-fermion", "hard-rods", "lieb-liniger"}; }

TbaModel make_model(const std::string& name, const std::map<std::string, double>& params,
                    std::vector<ChargeIndex> charges) {
  auto param = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  for (ChargeIndex k : charges)
    if (!supported_charge(k)) throw Error(ErrorCode::UnknownChargeIndex, "charge " + std::to_string(k) + " is not supported");
  if (name == "free-classical") return free_classical(std::move(charges));
  if (name == "free-fermion") return free_fermion(std::move(charges));
  if (name == "hard-rods") return hard_rods(param("a", 1.0), std::move(charges));
  if (name == "lieb-liniger") return lieb_liniger(param("c", 1.0), std::move(charges));
  throw Error(ErrorCode::ConfigError, "unknown TBA model '" + name + "'");
}

}  // namespace ekms::tba
