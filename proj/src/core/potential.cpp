#include "ekms/potential.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ekms/error.hpp"

namespace ekms {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainExceeded: return "DomainExceeded";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnknownChargeIndex: return "UnknownChargeIndex";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MemoryBudget: return "MemoryBudget";
    case ErrorCode::InvolutionFailure: return "InvolutionFailure";
    case ErrorCode::RingInconsistency: return "RingInconsistency";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TimelikeViolation: return "TimelikeViolation";
    case ErrorCode::InversionFailure: return "InversionFailure";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

PotentialVector PotentialVector::zeros(const std::vector<ChargeIndex>& charges) {
  PotentialVector v;
  for (ChargeIndex i : charges) v.set(i, 0.0);
  return v;
}

double PotentialVector::get(ChargeIndex i) const {
  auto it = entries_.find(i);
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<ChargeIndex> PotentialVector::indices() const {
  std::vector<ChargeIndex> out;
  out.reserve(entries_.size());
  for (const auto& [i, v] : entries_) out.push_back(i);
  return out;
}

bool PotentialVector::finite() const {
  for (const auto& [i, v] : entries_)
    if (!std::isfinite(v)) return false;
  return true;
}

PotentialVector PotentialVector::shifted(ChargeIndex i, double delta) const {
  PotentialVector out = *this;
  out.entries_[i] += delta;
  return out;
}

PotentialVector PotentialVector::scaled(double factor) const {
  PotentialVector out = *this;
  for (auto& [i, v] : out.entries_) v *= factor;
  return out;
}

std::string PotentialVector::to_string() const {
  std::string out;
  char buf[64];
  for (const auto& [i, v] : entries_) {
    if (!out.empty()) out += ',';
    std::snprintf(buf, sizeof buf, "%d=%.17g", i, v);
    out += buf;
  }
  return out;
}

PotentialVector PotentialVector::parse(const std::string& text) {
  PotentialVector out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "potential entry '" + item + "' is not of the form index=value");
    try {
      std::size_t used = 0;
      int idx = std::stoi(item.substr(0, eq), &used);
      double val = std::stod(item.substr(eq + 1));
      out.set(idx, val);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "cannot parse potential entry '" + item + "'");
    }
  }
  return out;
}

}  // namespace ekms
