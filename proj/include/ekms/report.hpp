#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ekms/backend.hpp"
#include "ekms/differentiation.hpp"
#include "json.hpp"

namespace ekms {

/// Everything the identity checks consume for a single state.
struct ThermoReport {
  std::string backend;
  std::vector<ChargeIndex> charges;
  PotentialVector beta;
  double f = 0.0;
  ChargeMap g;
  ChargeMap q_avg;
  CurrentMap j_avg;
  Eigen::MatrixXd C;
  BTensor B;
  double s = 0.0;
  ChargeMap js;
  double G_estimate = 0.0;
  bool has_fluxes = true;
  double current_cross_check = 0.0;
};

struct CheckReport {
  std::string identity;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> samples;
  std::string note;
};

/// s = sum_j beta^j <q_j> - f.
double entropy_density(const PotentialVector& beta, const ChargeMap& q, double f);

/// js_k = sum_j beta^j <j_kj> - g_k.
ChargeMap entropy_currents(const PotentialVector& beta, const CurrentMap& j, const ChargeMap& g);

ThermoReport assemble_report(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts = {});

nlohmann::json to_json(const CheckReport& report);
nlohmann::json to_json(const ThermoReport& report);

/// One row per (k, i) current entry.
std::string to_csv(const ThermoReport& report);

/// Result of comparing residual against tolerance, with the samples attached.
CheckReport make_check(std::string identity, double residual, double tolerance, std::vector<double> samples = {},
                       std::string note = {});

}  // namespace ekms
