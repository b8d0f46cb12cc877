#include "ekms/hydro/field.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ekms/error.hpp"

namespace ekms::hydro {

double Primitive::value(double x, double length) const {
  const double k = 2.0 * std::numbers::pi / length;
  switch (kind) {
    case Kind::Constant: return amplitude;
    case Kind::Cosine: return amplitude * std::cos(k * mode * x + phase);
    case Kind::Bump: {
      // periodic Gaussian-like bump exp((cos(k(x-c)) - 1) / (k w)^2)
      const double kw = k * width;
      return amplitude * std::exp((std::cos(k * (x - phase)) - 1.0) / (kw * kw));
    }
  }
  return 0.0;
}

double Primitive::derivative(double x, double length) const {
  const double k = 2.0 * std::numbers::pi / length;
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Cosine: return -amplitude * k * mode * std::sin(k * mode * x + phase);
    case Kind::Bump: {
      const double kw = k * width;
      return value(x, length) * (-k * std::sin(k * (x - phase))) / (kw * kw);
    }
  }
  return 0.0;
}

double FieldProfile::value(ChargeIndex k, double x, double length) const {
  auto it = terms.find(k);
  if (it == terms.end()) return 0.0;
  double v = 0.0;
  for (const auto& p : it->second) v += p.value(x, length);
  return v;
}

double FieldProfile::derivative(ChargeIndex k, double x, double length) const {
  auto it = terms.find(k);
  if (it == terms.end()) return 0.0;
  double v = 0.0;
  for (const auto& p : it->second) v += p.derivative(x, length);
  return v;
}

std::vector<ChargeIndex> FieldProfile::charges() const {
  std::vector<ChargeIndex> out;
  for (const auto& [k, v] : terms) out.push_back(k);
  return out;
}

std::map<ChargeIndex, std::vector<double>> FieldProfile::sample(const Grid& g) const {
  std::map<ChargeIndex, std::vector<double>> out;
  for (const auto& [k, v] : terms) {
    auto& row = out[k];
    for (int m = 0; m < g.cells; ++m) row.push_back(value(k, g.x(m), g.length));
  }
  return out;
}

double FieldProfile::max_gradient(const Grid& g) const {
  double worst = 0.0;
  for (const auto& [k, v] : terms)
    for (int m = 0; m < g.cells; ++m) worst = std::max(worst, std::abs(derivative(k, g.x(m), g.length)));
  return worst;
}

void FieldProfile::validate(const Grid& g, ChargeIndex energy) const {
  for (const auto& [k, v] : terms)
    for (int m = 0; m < g.cells; ++m)
      if (!std::isfinite(value(k, g.x(m), g.length)))
        throw Error(ErrorCode::NonFinite, "field u^" + std::to_string(k) + " is not finite");
  for (int m = 0; m < g.cells; ++m)
    if (!(value(energy, g.x(m), g.length) > 0.0))
      throw Error(ErrorCode::DomainError, "energy field must be positive everywhere");
}

FieldProfile FieldProfile::constant(const std::map<ChargeIndex, double>& values) {
  FieldProfile f;
  for (const auto& [k, v] : values) f.terms[k].push_back({Primitive::Kind::Constant, v});
  return f;
}

Primitive parse_primitive(const std::string& text) {
  // "constant A", "cosine A MODE [PHASE]", "bump A CENTRE WIDTH"
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  Primitive p;
  if (kind == "constant") {
    p.kind = Primitive::Kind::Constant;
    in >> p.amplitude;
  } else if (kind == "cosine") {
    p.kind = Primitive::Kind::Cosine;
    in >> p.amplitude >> p.mode;
    if (!(in >> p.phase)) p.phase = 0.0;
    in.clear();
  } else if (kind == "bump") {
    p.kind = Primitive::Kind::Bump;
    in >> p.amplitude >> p.phase >> p.width;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown field primitive '" + kind + "'");
  }
  if (in.fail()) throw Error(ErrorCode::ConfigError, "malformed field primitive '" + text + "'");
  return p;
}

}  // namespace ekms::hydro
