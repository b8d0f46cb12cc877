#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ekms/potential.hpp"

namespace ekms::cli {

enum class Subcommand { Tba, EdChain, Cft, Hydro, Checks };

Subcommand parse_subcommand(const std::string& name);
std::string to_string(Subcommand s);

struct TbaConfig {
  std::string model = "lieb-liniger";
  double c = 1.0;
  double a = 1.0;
  std::vector<ChargeIndex> charges{0, 1, 2, 4};
  int nodes = 400;
  double cutoff = 0.0;
  double tol = 1e-12;
  double damping = 0.5;
  int max_iters = 10000;
};

struct CftConfig {
  int d = 2;
  double beta_rest = 1.0;
  double theta = 0.0;
  double kappa = 0.0;  // nonzero selects the EKMS-violating fixture
};

struct ChainConfig {
  int N = 10;
  std::vector<ChargeIndex> charges{0, 2, 4};
  std::vector<int> scan{8, 10, 12};
  int pairs = 20;
  bool fluxes = true;
};

struct HydroConfig {
  std::string backend = "cft";  // cft | cft-kms-violating | tba
  int cells = 64;
  double length = 1.0;
  double dt = 0.0;
  double t_end = 1.0;
  std::string scheme = "central";
  double beta_bar = 1.0;
  double mu_bar = 0.0;
  int refinements = 3;
  std::string initial = "stationary";  // stationary | sound | perturbed
  double amplitude = 1e-3;
  int record_every = 0;
  /// charge -> primitive descriptions, e.g. "bump 0.3 0.5 0.1"
  std::map<ChargeIndex, std::vector<std::string>> fields{{2, {"constant 1"}}};
};

struct RunConfig {
  Subcommand subcommand = Subcommand::Checks;
  std::string backend = "cft";  // checks subcommand: cft | tba | edchain
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;
  std::string out = "ekms-out";
  std::uint64_t seed = 1;
  int samples = 10;
  std::optional<PotentialVector> beta;
  TbaConfig tba;
  CftConfig cft;
  ChainConfig chain;
  HydroConfig hydro;
};

/// Reads a YAML config. Errors carry "path:line:column:" anchors and code ConfigError.
RunConfig load_config(const std::string& path, RunConfig base = {});
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>", RunConfig base = {});

/// "NAME=VALUE" for --tol.
std::pair<std::string, double> parse_tolerance(const std::string& text);

}  // namespace ekms::cli
