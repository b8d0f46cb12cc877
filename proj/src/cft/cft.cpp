#include "ekms/cft/cft.hpp"

#include <cmath>

#include "ekms/error.hpp"

namespace ekms::cft {

double CftState::beta1() const { return -beta_rest * std::sinh(theta); }
double CftState::beta2() const { return beta_rest * std::cosh(theta); }

CftState cft_from_potentials(double beta1, double beta2, int d, double a) {
  if (!(beta2 > std::abs(beta1)))
    throw Error(ErrorCode::TimelikeViolation, "need beta2 > |beta1| for a boosted thermal state");
  CftState s;
  s.d = d;
  s.a = a;
  s.beta_rest = std::sqrt((beta2 - beta1) * (beta2 + beta1));
  s.theta = std::atanh(-beta1 / beta2);
  return s;
}

CftAverages cft_averages(const CftState& s) {
  const double ch = std::cosh(s.theta), sh = std::sinh(s.theta);
  const double scale = s.a * std::pow(s.beta_rest, -(s.d + 1));
  CftAverages out;
  out.q2 = scale * (s.d * ch * ch + sh * sh);
  out.q1 = scale * (s.d + 1) * ch * sh;
  out.j2 = out.q1;
  out.j1 = scale * (ch * ch + s.d * sh * sh);
  return out;
}

CftFluxes cft_fluxes(const CftState& s) {
  const double scale = std::pow(s.beta_rest, -s.d);
  CftFluxes out;
  out.g1 = -scale * std::cosh(s.theta);
  out.g2 = -scale * std::sinh(s.theta);
  out.f = out.g1;
  return out;
}

Eigen::Matrix2d cft_covariance(const CftState& s) {
  // f = -b2 S^-p with S = b2^2 - b1^2, p = (d+1)/2
  const double b1 = s.beta1(), b2 = s.beta2();
  const double S = s.beta_rest * s.beta_rest;
  const double p = 0.5 * (s.d + 1);
  const double Sp2 = std::pow(S, -p - 2.0);
  Eigen::Matrix2d C;
  C(0, 0) = 2.0 * p * b2 * Sp2 * (S + 2.0 * (p + 1.0) * b1 * b1);
  C(0, 1) = C(1, 0) = 2.0 * p * b1 * Sp2 * (S - 2.0 * (p + 1.0) * b2 * b2);
  C(1, 1) = Sp2 * (4.0 * p * (p + 1.0) * b2 * b2 * b2 - 6.0 * p * b2 * S);
  return s.a * C;
}

CftState cft_from_densities(double q1, double q2, int d) {
  if (!(q2 > 0.0) || !std::isfinite(q1) || !std::isfinite(q2))
    throw Error(ErrorCode::InversionFailure, "energy density must be positive");
  const double r = q1 / q2;
  CftState s;
  s.d = d;
  if (r == 0.0) {
    s.theta = 0.0;
    s.beta_rest = std::pow(q2 / d, -1.0 / (d + 1));
    return s;
  }
  // v = tanh(theta) solves r v^2 - (d+1) v + r d = 0 with |v| < 1.
  const double disc = (d + 1.0) * (d + 1.0) - 4.0 * r * r * d;
  if (disc <= 0.0) throw Error(ErrorCode::InversionFailure, "momentum density too large for the energy density");
  const double v = 2.0 * r * d / ((d + 1.0) + std::sqrt(disc));
  if (!(std::abs(v) < 1.0)) throw Error(ErrorCode::InversionFailure, "no subluminal boost for these densities");
  const double R = q2 * (1.0 - v * v) / (d + v * v);
  s.theta = std::atanh(v);
  s.beta_rest = std::pow(R, -1.0 / (d + 1));
  return s;
}

CftBackend::CftBackend(int d) : d_(d) {
  if (d < 2) throw Error(ErrorCode::DomainError, "conformal backend needs d >= 2");
}

BackendTraits CftBackend::traits() const {
  BackendTraits t;
  t.has_analytic_currents = true;
  t.has_momentum_charge = true;
  t.parity_symmetric = true;
  t.has_fluxes = true;
  t.momentum_index = 1;
  return t;
}

BackendTolerances CftBackend::tolerances() const {
  BackendTolerances t;
  t.G = 1e-12;
  t.B = 1e-10;
  t.identity = 1e-10;
  t.C = 1e-12;
  t.g1 = 1e-12;
  return t;
}

bool CftBackend::admissible(const PotentialVector& beta) const {
  if (!beta.finite()) return false;
  for (const auto& [k, b] : beta.entries())
    if (k != 1 && k != 2) return false;
  return beta.get(2) > std::abs(beta.get(1));
}

ThermoPoint CftBackend::evaluate(const PotentialVector& beta, EvalRequest request) const {
  CftState s = cft_from_potentials(beta.get(1), beta.get(2), d_);
  CftFluxes fl = cft_fluxes(s);
  ThermoPoint p;
  p.f = fl.f;
  if (request.fluxes) p.g = {{1, fl.g1}, {2, fl.g2}};
  if (request.averages) {
    CftAverages av = cft_averages(s);
    Averages a;
    a.q = {{1, av.q1}, {2, av.q2}};
    a.j = {{{1, 1}, av.q1}, {{1, 2}, av.q2}, {{2, 1}, av.j1}, {{2, 2}, av.j2}};
    p.averages = a;
  }
  return p;
}

std::optional<Eigen::MatrixXd> CftBackend::covariance(const PotentialVector& beta) const {
  return Eigen::MatrixXd(cft_covariance(cft_from_potentials(beta.get(1), beta.get(2), d_)));
}

KmsViolatingCft::KmsViolatingCft(int d, double kappa) : CftBackend(d), kappa_(kappa) {}

BackendTraits KmsViolatingCft::traits() const {
  BackendTraits t = CftBackend::traits();
  t.parity_symmetric = false;
  return t;
}

ThermoPoint KmsViolatingCft::evaluate(const PotentialVector& beta, EvalRequest request) const {
  ThermoPoint p = CftBackend::evaluate(beta, request);
  const double b2 = beta.get(2);
  if (request.fluxes) p.g[2] += kappa_ * std::pow(b2, -d_);
  if (p.averages) p.averages->j[{2, 2}] -= kappa_ * d_ * std::pow(b2, -d_ - 1);
  return p;
}

}  // namespace ekms::cft
