#include "ekms/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ekms/cft/cft.hpp"
#include "ekms/chain/backend.hpp"
#include "ekms/chain/checks.hpp"
#include "ekms/checks.hpp"
#include "ekms/error.hpp"
#include "ekms/hydro/few_charge.hpp"
#include "ekms/hydro/solver.hpp"
#include "ekms/tba/backend.hpp"
#include "ekms/tba/checks.hpp"

namespace ekms::cli {

namespace {

using Names = std::vector<std::string>;

const Names kThermo = {"b-symmetry", "convexity",  "currents-cross-check", "ekms",       "g1-equals-f",
                       "identity-a", "identity-b", "identity-c",           "identity-d", "report-consistency"};
const Names kTba = {"asymptotic", "ekms-chain", "occupation-bounds", "unitarity"};
const Names kChain = {"continuity", "energy-current", "first-moment", "involution", "kms", "tangent"};
const Names kHydro = {"charge-budget", "entropy-budget", "sound-speed", "stationarity"};
const Names kCft = {"few-charge"};

Names join(std::initializer_list<Names> parts) {
  Names out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool has_any(const std::set<std::string>& sel, const Names& names) {
  return std::any_of(names.begin(), names.end(), [&](const std::string& n) { return sel.count(n) != 0; });
}

std::string category(const std::string& name) {
  if (name == "ekms") return "G";
  if (name == "b-symmetry") return "B";
  if (name.rfind("identity-", 0) == 0) return "identity";
  if (name == "convexity") return "C";
  if (name == "g1-equals-f") return "g1";
  return {};
}

double tol_for(const RunConfig& cfg, const std::string& name, double fallback) {
  if (auto it = cfg.tolerances.find(name); it != cfg.tolerances.end()) return it->second;
  if (auto it = cfg.tolerances.find(category(name)); it != cfg.tolerances.end()) return it->second;
  return fallback;
}

CheckReport aggregate(const std::string& name, const std::vector<CheckReport>& parts) {
  CheckReport out;
  out.identity = name;
  out.pass = true;
  out.tolerance = parts.empty() ? 0.0 : parts.front().tolerance;
  bool nan = false;
  for (const auto& p : parts) {
    out.samples.push_back(p.residual);
    if (std::isnan(p.residual)) nan = true;
    else out.residual = std::max(out.residual, p.residual);
    if (!p.pass && out.pass) {
      out.pass = false;
      out.note = p.note;
    }
    if (out.note.empty()) out.note = p.note;
  }
  if (nan) out.residual = std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// Collects per-sample reports under their names and aggregates them at the end.
class Collector {
 public:
  explicit Collector(const std::set<std::string>& selected) : selected_(selected) {}
  bool wants(const std::string& name) const { return selected_.count(name) != 0; }
  void add(CheckReport c) {
    if (wants(c.identity)) parts_[c.identity].push_back(std::move(c));
  }
  std::vector<CheckReport> finish() const {
    std::vector<CheckReport> out;
    for (const auto& [name, parts] : parts_) out.push_back(aggregate(name, parts));
    return out;
  }

 private:
  const std::set<std::string>& selected_;
  std::map<std::string, std::vector<CheckReport>> parts_;
};

std::vector<PotentialVector> sample_states(const ThermoBackend& backend, const std::string& kind,
                                           const RunConfig& cfg, std::mt19937_64& rng,
                                           std::optional<PotentialVector> first) {
  if (cfg.samples < 1) throw Error(ErrorCode::ConfigError, "samples must be positive");
  std::vector<PotentialVector> out;
  if (first) {
    require_admissible(backend, *first);
    out.push_back(*first);
  }
  auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const auto charges = backend.charges();
  ChargeIndex top = 0;
  for (ChargeIndex k : charges)
    if (k % 2 == 0) top = std::max(top, k);
  int guard = 0;
  while (static_cast<int>(out.size()) < cfg.samples) {
    if (++guard > 1000 * cfg.samples) throw Error(ErrorCode::DomainError, "could not sample admissible states");
    PotentialVector b;
    if (kind == "cft") {
      const double br = U(0.5, 2.0), th = U(-1.0, 1.0);
      b.set(1, -br * std::sinh(th));
      b.set(2, br * std::cosh(th));
    } else if (kind == "tba") {
      for (ChargeIndex k : charges) {
        if (k == top) b.set(k, top == 2 ? U(0.5, 2.0) : U(0.05, 0.5));
        else if (k == 2) b.set(k, U(0.5, 2.0));
        else if (k == 0) b.set(k, U(-1.0, 1.0));
        else b.set(k, U(-0.2, 0.2));
      }
    } else {
      for (ChargeIndex k : charges) b.set(k, k == 2 ? U(0.1, 0.4) : U(-0.2, 0.2));
    }
    if (backend.admissible(b)) out.push_back(b);
  }
  return out;
}

void thermo_suite(const ThermoBackend& backend, const std::vector<PotentialVector>& states, const RunConfig& cfg,
                  Collector& col, RunResult& res) {
  const BackendTolerances t = backend.tolerances();
  const BackendTraits traits = backend.traits();
  if (col.wants("ekms")) col.add(check_ekms(backend, states, tol_for(cfg, "ekms", t.G)));
  const Names per_state = {"b-symmetry", "convexity",  "currents-cross-check", "g1-equals-f", "identity-a",
                           "identity-b", "identity-c", "identity-d",           "report-consistency"};
  bool any = false;
  for (const auto& n : per_state) any = any || col.wants(n);
  if (!any) return;
  const bool identities = col.wants("identity-a") || col.wants("identity-b") || col.wants("identity-c") ||
                          col.wants("identity-d");
  for (std::size_t s = 0; s < states.size(); ++s) {
    ThermoReport r = assemble_report(backend, states[s]);
    if (s == 0) {
      res.tables["thermo.csv"] = to_csv(r);
      res.report["state"] = to_json(r);
    }
    col.add(check_b_symmetry(r, tol_for(cfg, "b-symmetry", t.B)));
    col.add(check_convexity(r, tol_for(cfg, "convexity", t.C)));
    col.add(make_check("currents-cross-check", r.current_cross_check, tol_for(cfg, "currents-cross-check", 1e-7)));
    col.add(check_report_consistency(r));
    if (traits.has_momentum_charge)
      col.add(check_g1_equals_f(r, traits.momentum_index, tol_for(cfg, "g1-equals-f", t.g1)));
    else
      col.add(make_check("g1-equals-f", 0.0, tol_for(cfg, "g1-equals-f", t.g1), {}, "skipped: no momentum charge"));
    if (identities) {
      ThermoReport second = assemble_report(backend, companion_state(backend, states[s]));
      for (const CheckReport& c : check_identities(r, second, traits, t.identity))
        col.add(make_check(c.identity, c.residual, tol_for(cfg, c.identity, t.identity), c.samples, c.note));
    }
  }
}

void tba_suite(const RunConfig& cfg, const std::set<std::string>& sel, std::mt19937_64& rng, Collector& col,
               RunResult& res) {
  tba::SolverOptions opts;
  opts.nodes = cfg.tba.nodes;
  opts.cutoff = cfg.tba.cutoff;
  opts.tol = cfg.tba.tol;
  opts.damping = cfg.tba.damping;
  opts.max_iters = cfg.tba.max_iters;
  std::map<std::string, double> params{{"c", cfg.tba.c}, {"a", cfg.tba.a}};
  tba::TbaBackend backend(tba::make_model(cfg.tba.model, params, cfg.tba.charges), opts);
  res.report["backend"] = backend.name();
  auto states = sample_states(backend, "tba", cfg, rng, cfg.beta);
  thermo_suite(backend, states, cfg, col, res);
  if (!has_any(sel, kTba) && res.tables.count("pseudo_energy.csv")) return;
  const auto& model = backend.model();
  for (std::size_t s = 0; s < states.size(); ++s) {
    tba::PseudoEnergy pe = backend.solve(states[s]);
    if (s == 0) {
      res.tables["pseudo_energy.csv"] = tba::pseudo_energy_csv(model, pe);
      col.add(tba::check_unitarity(model, pe.grid, tol_for(cfg, "unitarity", 1e-12)));
    }
    col.add(tba::check_asymptotic(model, pe, tol_for(cfg, "asymptotic", 1e-10)));
    col.add(tba::check_ekms_chain(model, pe, tol_for(cfg, "ekms-chain", 1e-7)));
    col.add(tba::check_occupation_bounds(model, pe));
  }
}

std::unique_ptr<cft::CftBackend> make_cft(const CftConfig& c) {
  if (c.kappa != 0.0) return std::make_unique<cft::KmsViolatingCft>(c.d, c.kappa);
  return std::make_unique<cft::CftBackend>(c.d);
}

void cft_suite(const RunConfig& cfg, std::mt19937_64& rng, Collector& col, RunResult& res) {
  auto backend = make_cft(cfg.cft);
  res.report["backend"] = backend->name();
  PotentialVector first = cfg.beta.value_or(PotentialVector{{1, -cfg.cft.beta_rest * std::sinh(cfg.cft.theta)},
                                                            {2, cfg.cft.beta_rest * std::cosh(cfg.cft.theta)}});
  auto states = sample_states(*backend, "cft", cfg, rng, first);
  thermo_suite(*backend, states, cfg, col, res);

  std::ostringstream table;
  table.precision(17);
  table << "beta_rest,theta,q1,q2,j1,j2,g1,g2,f\n";
  for (const auto& b : states) {
    cft::CftState s = cft::cft_from_potentials(b.get(1), b.get(2), cfg.cft.d);
    cft::CftAverages av = cft::cft_averages(s);
    ThermoPoint p = backend->evaluate(b, {true, false});
    table << s.beta_rest << ',' << s.theta << ',' << av.q1 << ',' << av.q2 << ',' << av.j1 << ',' << av.j2 << ','
          << p.g.at(1) << ',' << p.g.at(2) << ',' << p.f << '\n';
    if (col.wants("few-charge")) {
      const double T = 1.0 / b.get(2), nu = std::tanh(s.theta);
      hydro::FewChargeCurrents fc = hydro::few_charge_currents(*backend, T, nu, 0.0, 0.0);
      const double r = std::max({std::abs(fc.j2 - av.j2) / std::max(1.0, std::abs(av.j2)),
                                 std::abs(fc.T11 - av.j1) / std::max(1.0, std::abs(av.j1)), fc.cross_check});
      col.add(make_check("few-charge", r, tol_for(cfg, "few-charge", 1e-8), {fc.j2, av.j2, fc.T11, av.j1}));
    }
  }
  res.tables["cft.csv"] = table.str();
}

chain::ChainSpec chain_spec(int N, const std::vector<ChargeIndex>& charges) {
  chain::ChainSpec spec = chain::ChainSpec::heisenberg(N);
  std::vector<chain::DensityPattern> kept;
  for (const auto& d : spec.densities)
    if (std::find(charges.begin(), charges.end(), d.label) != charges.end()) kept.push_back(d);
  if (kept.size() != charges.size()) throw Error(ErrorCode::ConfigError, "edchain charges must be drawn from {0, 2, 4}");
  spec.densities = kept;
  return spec;
}

void chain_suite(const RunConfig& cfg, const std::set<std::string>& sel, std::mt19937_64& rng, Collector& col,
                 RunResult& res) {
  const Names flux_checks = {"ekms", "identity-a", "identity-c", "identity-d", "g1-equals-f"};
  const bool fluxes = cfg.chain.fluxes && has_any(sel, flux_checks);
  chain::EdBackend backend(chain_spec(cfg.chain.N, cfg.chain.charges), fluxes);
  res.report["backend"] = backend.name();
  const auto& ops = backend.operators();
  auto states = sample_states(backend, "ed", cfg, rng, cfg.beta);
  const PotentialVector& beta = states.front();

  if (col.wants("ekms")) col.add(check_ekms(backend, states, tol_for(cfg, "ekms", backend.tolerances().G)));
  {
    std::set<std::string> no_ekms = sel;
    no_ekms.erase("ekms");
    Collector single(no_ekms);
    thermo_suite(backend, {beta}, cfg, single, res);
    for (auto& c : single.finish()) col.add(std::move(c));
  }

  col.add(chain::check_involution(ops, tol_for(cfg, "involution", 1e-11)));
  col.add(chain::check_continuity(ops, tol_for(cfg, "continuity", 1e-12)));
  const auto labels = ops.labels();
  auto has = [&](ChargeIndex k) { return std::find(labels.begin(), labels.end(), k) != labels.end(); };
  if (col.wants("energy-current")) {
    if (has(0) && has(2) && has(4))
      col.add(chain::check_energy_current(ops, tol_for(cfg, "energy-current", 1e-10)));
    else
      col.add(make_check("energy-current", 0.0, 1e-10, {}, "skipped: needs charges 0, 2 and 4"));
  }
  const bool wants_ens = has_any(sel, {"kms", "tangent", "first-moment"});
  if (!wants_ens) return;
  chain::GGEnsemble ens(ops, beta);
  if (col.wants("kms"))
    for (int p = 0; p < cfg.chain.pairs; ++p) {
      chain::PauliSum o1 = chain::random_local_observable(ops.N(), rng);
      chain::PauliSum o2 = chain::random_local_observable(ops.N(), rng);
      col.add(chain::check_kms(ens, o1, o2, tol_for(cfg, "kms", 1e-10)));
    }
  if (col.wants("tangent")) {
    chain::TangentProbe probe(ops, ens);
    for (int p = 0; p < cfg.chain.pairs; ++p) {
      chain::PauliSum o = chain::random_local_observable(ops.N(), rng);
      col.add(probe.check(o, labels[p % labels.size()], tol_for(cfg, "tangent", 1e-8)));
    }
  }
  if (col.wants("first-moment")) {
    for (std::size_t a = 0; a < labels.size(); ++a)
      for (std::size_t b = a; b < labels.size(); ++b)
        col.add(chain::check_first_moment(ops, ens, labels[a], labels[b], tol_for(cfg, "first-moment", 1e-3)));
    std::ostringstream table;
    table.precision(17);
    table << "N,i,j,lhs,rhs,residual,touches_cut\n";
    for (int n : cfg.chain.scan) {
      chain::ChainOperatorSet scan_ops = chain::build_chain(chain_spec(n, cfg.chain.charges));
      chain::GGEnsemble scan_ens(scan_ops, beta);
      for (std::size_t a = 0; a < labels.size(); ++a)
        for (std::size_t b = a; b < labels.size(); ++b) {
          chain::FirstMoment fm = chain::first_moment(scan_ops, scan_ens, labels[a], labels[b]);
          table << n << ',' << labels[a] << ',' << labels[b] << ',' << fm.lhs << ',' << fm.rhs << ',' << fm.residual
                << ',' << (fm.touches_cut ? 1 : 0) << '\n';
        }
    }
    res.tables["first_moment_scan.csv"] = table.str();
  }
}

hydro::FieldProfile make_fields(const HydroConfig& h) {
  hydro::FieldProfile f;
  for (const auto& [k, list] : h.fields)
    for (const auto& text : list) f.terms[k].push_back(hydro::parse_primitive(text));
  return f;
}

/// Orders below 2 count against the check; tiny errors sit at roundoff and are not scored.
CheckReport order_check(const std::string& name, const std::vector<double>& h, const std::vector<double>& err,
                        double tol) {
  const double worst = *std::max_element(err.begin(), err.end());
  std::ostringstream note;
  note.precision(4);
  if (worst <= 1e-13) {
    note << "errors at roundoff (max " << worst << ")";
    return make_check(name, 0.0, tol, err, note.str());
  }
  auto orders = hydro::observed_orders(h, err);
  const double p = *std::min_element(orders.begin(), orders.end());
  note << "observed orders";
  for (double o : orders) note << ' ' << o;
  return make_check(name, std::max(0.0, 2.0 - p), tol, err, note.str());
}

void hydro_suite(const RunConfig& cfg, const std::set<std::string>& sel, Collector& col, RunResult& res) {
  const HydroConfig& h = cfg.hydro;
  std::unique_ptr<ThermoBackend> backend;
  if (h.backend == "cft") {
    backend = std::make_unique<cft::CftBackend>(cfg.cft.d);
  } else if (h.backend == "cft-kms-violating") {
    backend = std::make_unique<cft::KmsViolatingCft>(cfg.cft.d, cfg.cft.kappa != 0.0 ? cfg.cft.kappa : 0.05);
  } else if (h.backend == "tba") {
    tba::SolverOptions opts;
    opts.nodes = cfg.tba.nodes;
    opts.cutoff = cfg.tba.cutoff;
    opts.tol = cfg.tba.tol;
    std::map<std::string, double> params{{"c", cfg.tba.c}, {"a", cfg.tba.a}};
    backend = std::make_unique<tba::TbaBackend>(tba::make_model(cfg.tba.model, params, cfg.tba.charges), opts);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown hydro backend '" + h.backend + "'");
  }
  res.report["backend"] = backend->name();
  if (h.refinements < 1 || h.cells < 4) throw Error(ErrorCode::ConfigError, "hydro needs cells >= 4 and refinements >= 1");
  if ((col.wants("stationarity") || col.wants("entropy-budget")) && h.refinements < 2)
    throw Error(ErrorCode::ConfigError, "convergence checks need refinements >= 2");
  if (col.wants("stationarity") && h.initial != "stationary")
    throw Error(ErrorCode::ConfigError, "stationarity needs initial: stationary");
  if (col.wants("sound-speed") && h.initial != "sound")
    throw Error(ErrorCode::ConfigError, "sound-speed needs initial: sound");
  if ((col.wants("charge-budget") || col.wants("entropy-budget")) && h.initial == "sound")
    throw Error(ErrorCode::ConfigError, "budget checks need stationary or perturbed initial data");

  hydro::FieldProfile fields = make_fields(h);
  hydro::SolverOptions sopts;
  sopts.scheme = hydro::parse_scheme(h.scheme);
  hydro::Solver solver(*backend, fields, sopts);

  if (h.initial == "sound") {
    hydro::Grid grid{h.cells * (1 << (h.refinements - 1)), h.length};
    fields.validate(grid);
    PotentialVector bg;
    for (ChargeIndex k : backend->charges())
      bg.set(k, k == 0 ? h.beta_bar * (fields.value(0, 0.0, h.length) - h.mu_bar) : h.beta_bar * fields.value(k, 0.0, h.length));
    hydro::SoundWave w = hydro::sound_wave_test(solver, grid, bg, h.amplitude, h.t_end, h.dt);
    col.add(make_check("sound-speed", w.relative_error, tol_for(cfg, "sound-speed", 0.01), {w.predicted, w.measured}));
    res.report["sound"] = {{"predicted", w.predicted}, {"measured", w.measured}};
    return;
  }
  if (h.initial != "stationary" && h.initial != "perturbed")
    throw Error(ErrorCode::ConfigError, "initial must be stationary, perturbed or sound");

  std::vector<double> dxs, drifts, dS, rates, budgets;
  std::optional<hydro::Trajectory> finest;
  for (int r = 0; r < h.refinements; ++r) {
    hydro::Grid grid{h.cells << r, h.length};
    fields.validate(grid);
    hydro::HydroState st;
    if (h.initial == "stationary") {
      st = hydro::stationary_state(*backend, grid, fields, h.beta_bar, h.mu_bar);
    } else {
      const double k = 2.0 * std::numbers::pi / h.length;
      st = hydro::state_from_potentials(*backend, grid, [&](double x) {
        PotentialVector b;
        for (ChargeIndex c : backend->charges()) {
          double v = c == 0 ? h.beta_bar * (fields.value(0, x, h.length) - h.mu_bar) : h.beta_bar * fields.value(c, x, h.length);
          if (c == 2) v += h.amplitude * std::sin(k * x);
          if (c == 1) v += 0.5 * h.amplitude * std::cos(k * x);
          if (c == 0) v += 0.3 * h.amplitude * std::sin(2.0 * k * x);
          b.set(c, v);
        }
        return b;
      });
    }
    const double dt = h.dt > 0.0 ? h.dt / (1 << r) : 0.0;
    hydro::Trajectory tr = hydro::evolve(solver, st, {dt, h.t_end, h.record_every});
    const hydro::EntropyBudget eb = hydro::entropy_budget(tr);
    dxs.push_back(grid.dx());
    drifts.push_back(hydro::max_drift(tr));
    dS.push_back(eb.max_change);
    rates.push_back(eb.max_rate);
    budgets.push_back(hydro::charge_budget_residual(tr));
    finest = std::move(tr);
  }

  std::ostringstream table;
  table.precision(17);
  table << "cells,dx,max_drift,entropy_max_change,entropy_max_rate,charge_budget\n";
  for (std::size_t r = 0; r < dxs.size(); ++r)
    table << (h.cells << r) << ',' << dxs[r] << ',' << drifts[r] << ',' << dS[r] << ',' << rates[r] << ','
          << budgets[r] << '\n';
  res.tables["convergence.csv"] = table.str();
  for (std::size_t s = 0; s < finest->snapshots.size(); ++s) {
    std::ostringstream name;
    name << "hydro_snapshot_" << s << ".csv";
    res.tables[name.str()] = hydro::snapshot_csv(*finest, finest->snapshots[s]);
  }
  nlohmann::json man = hydro::manifest(*finest);
  man["thermal_family_residual"] = hydro::thermal_family_residual(finest->final_state, fields);
  man["max_field_gradient"] = fields.max_gradient(finest->grid);
  res.report["hydro"] = man;

  if (col.wants("stationarity")) col.add(order_check("stationarity", dxs, drifts, tol_for(cfg, "stationarity", 0.2)));
  if (col.wants("entropy-budget")) col.add(order_check("entropy-budget", dxs, dS, tol_for(cfg, "entropy-budget", 0.2)));
  if (col.wants("charge-budget"))
    col.add(make_check("charge-budget", *std::max_element(budgets.begin(), budgets.end()),
                       tol_for(cfg, "charge-budget", 1e-10), budgets));
  (void)sel;
}

std::set<std::string> selection(const RunConfig& cfg) {
  const Names avail = available_checks(cfg.subcommand, cfg.backend);
  std::set<std::string> sel;
  if (cfg.checks.empty()) {
    switch (cfg.subcommand) {
      case Subcommand::EdChain:
        sel.insert(kChain.begin(), kChain.end());
        sel.insert({"b-symmetry", "identity-b", "convexity", "currents-cross-check"});
        break;
      case Subcommand::Hydro:
        if (cfg.hydro.initial == "stationary") sel = {"stationarity", "charge-budget", "entropy-budget"};
        else if (cfg.hydro.initial == "sound") sel = {"sound-speed"};
        else sel = {"entropy-budget", "charge-budget"};
        break;
      default: sel.insert(avail.begin(), avail.end());
    }
    return sel;
  }
  for (const auto& c : cfg.checks) {
    if (std::find(avail.begin(), avail.end(), c) == avail.end()) {
      std::string list;
      for (const auto& a : avail) list += (list.empty() ? "" : ", ") + a;
      throw Error(ErrorCode::ConfigError, "check '" + c + "' is not available here; choose from: " + list);
    }
    sel.insert(c);
  }
  return sel;
}

}  // namespace

std::vector<std::string> available_checks(Subcommand sub, const std::string& backend) {
  switch (sub) {
    case Subcommand::Tba: return join({kThermo, kTba});
    case Subcommand::Cft: return join({kThermo, kCft});
    case Subcommand::EdChain: return join({kThermo, kChain});
    case Subcommand::Hydro: return join({kHydro});
    case Subcommand::Checks:
      if (backend != "cft" && backend != "tba" && backend != "edchain")
        throw Error(ErrorCode::ConfigError, "unknown backend '" + backend + "' (cft, tba, edchain)");
      return join({kThermo});
  }
  return {};
}

std::vector<std::string> all_check_names() { return join({kThermo, kTba, kChain, kHydro, kCft}); }

RunResult execute(const RunConfig& cfg) {
  const std::set<std::string> sel = selection(cfg);
  RunResult res;
  std::mt19937_64 rng(cfg.seed);
  Collector col(sel);
  res.report["subcommand"] = to_string(cfg.subcommand);
  res.report["seed"] = cfg.seed;

  Subcommand effective = cfg.subcommand;
  if (effective == Subcommand::Checks)
    effective = cfg.backend == "tba" ? Subcommand::Tba : cfg.backend == "edchain" ? Subcommand::EdChain : Subcommand::Cft;
  switch (effective) {
    case Subcommand::Tba: tba_suite(cfg, sel, rng, col, res); break;
    case Subcommand::Cft: cft_suite(cfg, rng, col, res); break;
    case Subcommand::EdChain: chain_suite(cfg, sel, rng, col, res); break;
    case Subcommand::Hydro: hydro_suite(cfg, sel, col, res); break;
    case Subcommand::Checks: break;
  }

  res.checks = col.finish();
  std::sort(res.checks.begin(), res.checks.end(),
            [](const CheckReport& a, const CheckReport& b) { return a.identity < b.identity; });
  nlohmann::json arr = nlohmann::json::array();
  std::ostringstream summary;
  summary << "ekms " << to_string(cfg.subcommand) << " backend=" << res.report.value("backend", std::string("?"))
          << " seed=" << cfg.seed << '\n';
  std::vector<std::string> failing;
  for (const auto& c : res.checks) {
    arr.push_back(to_json(c));
    summary << (c.pass ? "PASS " : "FAIL ") << c.identity << " residual=" << c.residual << " tol=" << c.tolerance;
    if (!c.note.empty()) summary << "  (" << c.note << ')';
    summary << '\n';
    if (!c.pass) failing.push_back(c.identity);
  }
  res.report["checks"] = arr;
  res.report["pass"] = failing.empty();
  if (failing.empty()) {
    summary << "all " << res.checks.size() << " checks passed\n";
  } else {
    summary << "failed:";
    for (const auto& f : failing) summary << ' ' << f;
    summary << '\n';
  }
  res.summary = summary.str();
  res.exit_code = failing.empty() ? 0 : 1;
  return res;
}

RunResult run(const RunConfig& cfg) {
  RunResult res = execute(cfg);
  namespace fs = std::filesystem;
  const fs::path out(cfg.out);
  fs::create_directories(out / "tables");
  std::ofstream(out / "report.json") << res.report.dump(2) << '\n';
  std::ofstream(out / "summary.txt") << res.summary;
  for (const auto& [name, csv] : res.tables) std::ofstream(out / "tables" / name) << csv;
  return res;
}

}  // namespace ekms::cli
