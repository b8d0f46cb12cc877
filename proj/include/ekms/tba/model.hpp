#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ekms/potential.hpp"

namespace ekms::tba {

enum class Statistics { Fermionic, Classical };

/// F(eps): -log(1 + e^-eps) for fermions, -e^-eps for classical particles.
double free_function(Statistics s, double eps);
/// Occupation n = F'(eps).
double occupation(Statistics s, double eps);
/// -F''(eps): n(1-n) for fermions, n for classical particles.
double occupation_slope(Statistics s, double eps);

/// h_0 = 1, h_k = theta^k / k.
double one_particle(ChargeIndex k, double theta);
double one_particle_derivative(ChargeIndex k, double theta);
bool supported_charge(ChargeIndex k);

struct TbaModel {
  std::string name;
  Statistics statistics = Statistics::Fermionic;
  std::vector<ChargeIndex> charges{0, 1, 2, 4};
  double measure_prefactor = 1.0;
  bool parity_symmetric = true;
  bool zero_kernel = false;
  /// phi(theta', theta)
  std::function<double(double, double)> kernel;
  /// d phi(theta', theta) / d theta; may be empty, then differenced.
  std::function<double(double, double)> kernel_dtheta;
  std::map<std::string, double> parameters;

  double phi(double theta_p, double theta) const { return zero_kernel ? 0.0 : kernel(theta_p, theta); }
  double dphi(double theta_p, double theta) const;
};

TbaModel free_classical(std::vector<ChargeIndex> charges = {0, 1, 2, 4});
TbaModel free_fermion(std::vector<ChargeIndex> charges = {0, 1, 2, 4});
TbaModel hard_rods(double a, std::vector<ChargeIndex> charges = {0, 1, 2, 4});
TbaModel lieb_liniger(double c, std::vector<ChargeIndex> charges = {0, 1, 2, 4});

/// Registry lookup: "free-classical", "free-fermion", "hard-rods" (a), "lieb-liniger" (c).
TbaModel make_model(const std::string& name, const std::map<std::string, double>& params = {},
                    std::vector<ChargeIndex> charges = {0, 1, 2, 4});
std::vector<std::string> registered_models();

}  // namespace ekms::tba
