#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ekms/cli/config.hpp"
#include "ekms/cli/run.hpp"
#include "ekms/error.hpp"

namespace {

using ekms::cli::RunConfig;

template <class T>
struct Flag {
  T value{};
  std::vector<CLI::Option*> opts;
  bool given() const {
    for (auto* o : opts)
      if (o->count()) return true;
    return false;
  }
  void apply(T& dst) const {
    if (given()) dst = value;
  }
};

struct Flags {
  std::string config;
  Flag<std::string> out;
  Flag<std::uint64_t> seed;
  std::vector<std::string> tol;
  std::vector<std::string> checks;
  Flag<int> samples;
  Flag<std::string> beta;
  Flag<std::string> backend;
  // tba
  Flag<std::string> model;
  Flag<double> c, a, cutoff;
  Flag<int> nodes;
  Flag<std::vector<int>> tba_charges;
  // cft
  Flag<int> d;
  Flag<double> beta_rest, theta, kappa;
  // edchain
  Flag<int> N, pairs;
  Flag<double> beta2;
  Flag<std::vector<int>> scan;
  // hydro
  Flag<std::string> hydro_backend, scheme, initial;
  Flag<int> cells, refinements;
  Flag<double> dt, t_end, beta_bar, mu_bar, amplitude;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "YAML run configuration");
  f.out.opts.push_back(app->add_option("--out", f.out.value, "output directory"));
  f.seed.opts.push_back(app->add_option("--seed", f.seed.value, "random seed"));
  app->add_option("--tol", f.tol, "tolerance override NAME=VALUE (check name or G, B, identity, C, g1)");
  app->add_option("--check", f.checks, "run only the named check (repeatable)");
  f.samples.opts.push_back(app->add_option("--samples", f.samples.value, "number of sampled states"));
  f.beta.opts.push_back(app->add_option("--beta", f.beta.value, "explicit state, e.g. 2=1,0=0.2"));
}

void add_tba(CLI::App* app, Flags& f) {
  f.model.opts.push_back(app->add_option("--model", f.model.value, "free-classical, free-fermion, hard-rods, lieb-liniger"));
  f.c.opts.push_back(app->add_option("--c", f.c.value, "Lieb-Liniger coupling"));
  f.a.opts.push_back(app->add_option("--a", f.a.value, "hard-rod length"));
  f.nodes.opts.push_back(app->add_option("--nodes", f.nodes.value, "quadrature nodes"));
  f.cutoff.opts.push_back(app->add_option("--cutoff", f.cutoff.value, "rapidity cutoff (0 = automatic)"));
  f.tba_charges.opts.push_back(app->add_option("--charges", f.tba_charges.value, "charge labels"));
}

void add_cft(CLI::App* app, Flags& f) {
  f.d.opts.push_back(app->add_option("--d", f.d.value, "space-time dimension"));
  f.beta_rest.opts.push_back(app->add_option("--beta-rest", f.beta_rest.value, "rest-frame inverse temperature"));
  f.theta.opts.push_back(app->add_option("--theta", f.theta.value, "rapidity of the boost"));
  f.kappa.opts.push_back(app->add_option("--kappa", f.kappa.value, "strength of the EKMS-violating fixture (0 = exact CFT)"));
}

void add_chain(CLI::App* app, Flags& f) {
  f.N.opts.push_back(app->add_option("--N", f.N.value, "number of sites (even, 6..14)"));
  f.beta2.opts.push_back(app->add_option("--beta2", f.beta2.value, "energy potential; other potentials zero"));
  f.pairs.opts.push_back(app->add_option("--pairs", f.pairs.value, "random observables per exact check"));
  f.scan.opts.push_back(app->add_option("--scan", f.scan.value, "site counts for the first-moment table"));
}

void add_hydro(CLI::App* app, Flags& f) {
  f.hydro_backend.opts.push_back(app->add_option("--hydro-backend", f.hydro_backend.value, "cft, cft-kms-violating, tba"));
  f.cells.opts.push_back(app->add_option("--cells", f.cells.value, "cells on the coarsest grid"));
  f.refinements.opts.push_back(app->add_option("--refinements", f.refinements.value, "number of grids, each halving dx"));
  f.dt.opts.push_back(app->add_option("--dt", f.dt.value, "time step on the coarsest grid (0 = from CFL)"));
  f.t_end.opts.push_back(app->add_option("--t-end", f.t_end.value, "final time"));
  f.scheme.opts.push_back(app->add_option("--scheme", f.scheme.value, "central or llf"));
  f.initial.opts.push_back(app->add_option("--initial", f.initial.value, "stationary, perturbed or sound"));
  f.beta_bar.opts.push_back(app->add_option("--beta-bar", f.beta_bar.value, "thermalisation constant"));
  f.mu_bar.opts.push_back(app->add_option("--mu-bar", f.mu_bar.value, "chemical potential shift on charge 0"));
  f.amplitude.opts.push_back(app->add_option("--amplitude", f.amplitude.value, "perturbation amplitude"));
}

RunConfig build_config(const std::string& sub, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = ekms::cli::load_config(f.config);
  if (!sub.empty()) cfg.subcommand = ekms::cli::parse_subcommand(sub);
  f.out.apply(cfg.out);
  f.seed.apply(cfg.seed);
  f.samples.apply(cfg.samples);
  f.backend.apply(cfg.backend);
  if (f.beta.given()) cfg.beta = ekms::PotentialVector::parse(f.beta.value);
  for (const auto& t : f.tol) cfg.tolerances.insert_or_assign(ekms::cli::parse_tolerance(t).first,
                                                              ekms::cli::parse_tolerance(t).second);
  if (!f.checks.empty()) cfg.checks = f.checks;

  f.model.apply(cfg.tba.model);
  f.c.apply(cfg.tba.c);
  f.a.apply(cfg.tba.a);
  f.nodes.apply(cfg.tba.nodes);
  f.cutoff.apply(cfg.tba.cutoff);
  f.tba_charges.apply(cfg.tba.charges);

  f.d.apply(cfg.cft.d);
  f.beta_rest.apply(cfg.cft.beta_rest);
  f.theta.apply(cfg.cft.theta);
  f.kappa.apply(cfg.cft.kappa);

  f.N.apply(cfg.chain.N);
  f.pairs.apply(cfg.chain.pairs);
  f.scan.apply(cfg.chain.scan);
  if (f.beta2.given()) cfg.beta = ekms::PotentialVector{{2, f.beta2.value}};

  f.hydro_backend.apply(cfg.hydro.backend);
  f.cells.apply(cfg.hydro.cells);
  f.refinements.apply(cfg.hydro.refinements);
  f.dt.apply(cfg.hydro.dt);
  f.t_end.apply(cfg.hydro.t_end);
  f.scheme.apply(cfg.hydro.scheme);
  f.initial.apply(cfg.hydro.initial);
  f.beta_bar.apply(cfg.hydro.beta_bar);
  f.mu_bar.apply(cfg.hydro.mu_bar);
  f.amplitude.apply(cfg.hydro.amplitude);
  return cfg;
}

bool usage_error(ekms::ErrorCode code) {
  using ekms::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::DomainExceeded:
    case ErrorCode::DomainError:
    case ErrorCode::UnknownChargeIndex:
    case ErrorCode::TimelikeViolation:
    case ErrorCode::MemoryBudget:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-scale KMS laboratory: thermodynamic backends, identity checks and hydrodynamics"};
  app.require_subcommand(0, 1);
  Flags flags;
  add_common(&app, flags);

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"tba", "thermodynamic Bethe ansatz models"},
                      {"edchain", "exact diagonalisation of the Heisenberg chain"},
                      {"cft", "boosted conformal fluid in closed form"},
                      {"hydro", "Euler-scale evolution in external fields"},
                      {"checks", "generic identity suite on a chosen backend"}};
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags);
    const std::string n = s.name;
    if (n == "tba" || n == "checks" || n == "hydro") add_tba(sub, flags);
    if (n == "cft" || n == "checks" || n == "hydro") add_cft(sub, flags);
    if (n == "edchain" || n == "checks") add_chain(sub, flags);
    if (n == "hydro") add_hydro(sub, flags);
    if (n == "checks") flags.backend.opts.push_back(sub->add_option("--backend", flags.backend.value, "cft, tba or edchain"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string sub;
  for (const auto* s : app.get_subcommands()) sub = s->get_name();
  try {
    if (sub.empty() && flags.config.empty()) {
      std::cerr << app.help();
      return 2;
    }
    RunConfig cfg = build_config(sub, flags);
    ekms::cli::RunResult res = ekms::cli::run(cfg);
    std::cout << res.summary;
    if (res.exit_code != 0) {
      std::cerr << "check failure:";
      for (const auto& c : res.checks)
        if (!c.pass) std::cerr << ' ' << c.identity;
      std::cerr << '\n';
    }
    return res.exit_code;
  } catch (const ekms::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
