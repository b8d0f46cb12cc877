#include "ekms/hydro/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "ekms/differentiation.hpp"
#include "ekms/error.hpp"
#include "ekms/report.hpp"

namespace ekms::hydro {

FluxScheme parse_scheme(const std::string& name) {
  if (name == "central") return FluxScheme::Central;
  if (name == "llf" || name == "lax-friedrichs") return FluxScheme::LocalLaxFriedrichs;
  throw Error(ErrorCode::ConfigError, "unknown flux scheme '" + name + "'");
}

std::string to_string(FluxScheme scheme) {
  return scheme == FluxScheme::Central ? "central" : "llf";
}

Averages cell_averages(const ThermoBackend& backend, const PotentialVector& beta, bool currents) {
  if (backend.traits().has_analytic_currents) {
    ThermoPoint p = backend.evaluate(beta, {false, true});
    if (p.averages) return *p.averages;
  }
  Averages a;
  a.q = densities_from_free_energy(backend, beta);
  if (currents) a.j = currents_from_flux(backend, beta).values;
  return a;
}

namespace {

std::string cell_label(int cell) { return cell < 0 ? std::string("state") : "cell " + std::to_string(cell); }

}  // namespace

PotentialVector invert_state(const ThermoBackend& backend, const ChargeMap& q_cell, const PotentialVector& guess,
                             const InvertOptions& opts, int cell) {
  const auto charges = backend.charges();
  const int n = static_cast<int>(charges.size());
  Eigen::VectorXd target(n);
  for (int a = 0; a < n; ++a) {
    auto it = q_cell.find(charges[a]);
    if (it == q_cell.end())
      throw Error(ErrorCode::UnknownChargeIndex, "missing density for charge " + std::to_string(charges[a]));
    target[a] = it->second;
  }
  if (!target.allFinite()) throw Error(ErrorCode::InversionFailure, cell_label(cell) + ": non-finite densities");
  const double scale = std::max(1.0, target.lpNorm<Eigen::Infinity>());

  auto residual_of = [&](const PotentialVector& beta) -> std::optional<Eigen::VectorXd> {
    try {
      if (!beta.finite() || !backend.admissible(beta)) return std::nullopt;
      Averages av = cell_averages(backend, beta, false);
      Eigen::VectorXd r(n);
      for (int a = 0; a < n; ++a) r[a] = av.q.at(charges[a]) - target[a];
      if (!r.allFinite()) return std::nullopt;
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  PotentialVector beta = guess;
  auto r = residual_of(beta);
  if (!r) throw Error(ErrorCode::InversionFailure, cell_label(cell) + ": initial guess is not admissible");
  double norm = r->lpNorm<Eigen::Infinity>();
  for (int it = 0; it <= opts.max_iters; ++it) {
    if (norm <= opts.tol * scale) return beta;
    if (it == opts.max_iters) break;
    Eigen::MatrixXd C = static_covariance(backend, beta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(C);
    Eigen::VectorXd step = ldlt.info() == Eigen::Success ? Eigen::VectorXd(ldlt.solve(*r))
                                                         : Eigen::VectorXd(C.partialPivLu().solve(*r));
    bool accepted = false;
    double lambda = 1.0;
    for (int h = 0; h < 40 && !accepted; ++h, lambda *= 0.5) {
      PotentialVector trial = beta;
      for (int a = 0; a < n; ++a) trial.set(charges[a], beta.get(charges[a]) + lambda * step[a]);
      auto rt = residual_of(trial);
      if (!rt) continue;
      const double nt = rt->lpNorm<Eigen::Infinity>();
      if (nt < (1.0 - 1e-4 * lambda) * norm) {
        beta = trial;
        r = rt;
        norm = nt;
        accepted = true;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << cell_label(cell) << ": line search stalled, residual " << norm / scale;
      throw Error(ErrorCode::InversionFailure, msg.str());
    }
  }
  std::ostringstream msg;
  msg << cell_label(cell) << ": no convergence after " << opts.max_iters << " iterations, residual " << norm / scale;
  throw Error(ErrorCode::InversionFailure, msg.str());
}

PotentialVector HydroState::beta_at(int m) const {
  PotentialVector b;
  for (std::size_t a = 0; a < charges.size(); ++a) b.set(charges[a], beta(m, a));
  return b;
}

ChargeMap HydroState::q_at(int m) const {
  ChargeMap out;
  for (std::size_t a = 0; a < charges.size(); ++a) out[charges[a]] = q(m, a);
  return out;
}

Eigen::VectorXd HydroState::totals() const { return q.colwise().sum().transpose() * grid.dx(); }

HydroState state_from_potentials(const ThermoBackend& backend, const Grid& grid,
                                 const std::function<PotentialVector(double)>& beta_of_x) {
  HydroState st;
  st.grid = grid;
  st.charges = backend.charges();
  const int n = static_cast<int>(st.charges.size());
  st.q.resize(grid.cells, n);
  st.beta.resize(grid.cells, n);
  for (int m = 0; m < grid.cells; ++m) {
    PotentialVector b = beta_of_x(grid.x(m));
    require_admissible(backend, b);
    Averages av = cell_averages(backend, b, false);
    for (int a = 0; a < n; ++a) {
      st.beta(m, a) = b.get(st.charges[a]);
      st.q(m, a) = av.q.at(st.charges[a]);
    }
  }
  return st;
}

HydroState stationary_state(const ThermoBackend& backend, const Grid& grid, const FieldProfile& fields,
                            double beta_bar, double mu_bar) {
  const auto charges = backend.charges();
  return state_from_potentials(backend, grid, [&](double x) {
    PotentialVector b;
    for (ChargeIndex k : charges) {
      double u = fields.value(k, x, grid.length);
      b.set(k, k == 0 ? beta_bar * (u - mu_bar) : beta_bar * u);
    }
    return b;
  });
}

double thermal_family_residual(const HydroState& state, const FieldProfile& fields) {
  const int M = state.grid.cells;
  double num = 0.0, den = 0.0, bmax = 0.0;
  for (int m = 0; m < M; ++m)
    for (std::size_t a = 0; a < state.charges.size(); ++a) {
      bmax = std::max(bmax, std::abs(state.beta(m, a)));
      if (state.charges[a] == 0) continue;
      const double u = fields.value(state.charges[a], state.grid.x(m), state.grid.length);
      num += u * state.beta(m, a);
      den += u * u;
    }
  const double bbar = den > 0.0 ? num / den : 0.0;
  double worst = 0.0;
  for (std::size_t a = 0; a < state.charges.size(); ++a) {
    std::vector<double> dev(M);
    for (int m = 0; m < M; ++m)
      dev[m] = state.beta(m, a) - bbar * fields.value(state.charges[a], state.grid.x(m), state.grid.length);
    if (state.charges[a] == 0) {
      double mean = 0.0;
      for (double v : dev) mean += v / M;
      for (double& v : dev) v -= mean;
    }
    for (double v : dev) worst = std::max(worst, std::abs(v));
  }
  return bmax > 0.0 ? worst / bmax : worst;
}

Solver::Solver(const ThermoBackend& backend, FieldProfile fields, SolverOptions opts)
    : backend_(backend), fields_(std::move(fields)), opts_(opts) {
  const auto charges = backend.charges();
  for (ChargeIndex k : fields_.charges())
    if (std::find(charges.begin(), charges.end(), k) == charges.end())
      throw Error(ErrorCode::UnknownChargeIndex, "field for charge " + std::to_string(k) + " not carried by backend");
}

namespace {

void invert_all(const ThermoBackend& backend, HydroState& st, const InvertOptions& opts) {
  for (int m = 0; m < st.grid.cells; ++m) {
    PotentialVector b = invert_state(backend, st.q_at(m), st.beta_at(m), opts, m);
    for (std::size_t a = 0; a < st.charges.size(); ++a) st.beta(m, a) = b.get(st.charges[a]);
  }
}

}  // namespace

RhsResult Solver::rhs(HydroState& st) const {
  invert_all(backend_, st, opts_.invert);
  const int M = st.grid.cells;
  const int n = static_cast<int>(st.charges.size());
  const double dx = st.grid.dx();

  Eigen::MatrixXd F(M, n), S(M, n);
  for (int m = 0; m < M; ++m) {
    Averages av = cell_averages(backend_, st.beta_at(m), true);
    const double x = st.grid.x(m);
    for (int a = 0; a < n; ++a) {
      const ChargeIndex i = st.charges[a];
      double flux = 0.0, src = 0.0;
      for (ChargeIndex k : st.charges) {
        flux += fields_.value(k, x, st.grid.length) * av.j.at({k, i});
        src -= fields_.derivative(k, x, st.grid.length) * av.j.at({i, k});
      }
      F(m, a) = flux;
      S(m, a) = src;
    }
  }

  const bool llf = opts_.scheme == FluxScheme::LocalLaxFriedrichs;
  if (llf && speeds_.size() != M)
    throw Error(ErrorCode::DimensionMismatch, "Lax-Friedrichs speeds not set for this grid");
  // interface m + 1/2
  Eigen::MatrixXd face(M, n);
  for (int m = 0; m < M; ++m) {
    const int r = (m + 1) % M;
    face.row(m) = 0.5 * (F.row(m) + F.row(r));
    if (llf) face.row(m) -= 0.5 * std::max(speeds_[m], speeds_[r]) * (st.q.row(r) - st.q.row(m));
  }
  RhsResult out;
  out.dq.resize(M, n);
  for (int m = 0; m < M; ++m) {
    const int l = (m + M - 1) % M;
    out.dq.row(m) = -(face.row(m) - face.row(l)) / dx + S.row(m);
  }
  out.source = S.colwise().sum().transpose() * dx;
  return out;
}

Eigen::MatrixXd flux_jacobian(const Solver& solver, const PotentialVector& beta, double x, double length) {
  const auto charges = solver.backend().charges();
  const int n = static_cast<int>(charges.size());
  BTensor B = b_matrix(solver.backend(), beta);
  Eigen::MatrixXd C = static_covariance(solver.backend(), beta);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (ChargeIndex k : charges) sum += solver.fields().value(k, x, length) * B.at(k);
  return sum * C.inverse();
}

Eigen::VectorXd Solver::local_speeds(const HydroState& st) const {
  const int M = st.grid.cells;
  const int n = static_cast<int>(st.charges.size());
  Eigen::VectorXd v(M);
  for (int m = 0; m < M; ++m) {
    Eigen::MatrixXd A = flux_jacobian(*this, st.beta_at(m), st.grid.x(m), st.grid.length);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    double rho = 0.0;
    for (int e = 0; e < n; ++e) rho = std::max(rho, std::abs(es.eigenvalues()[e]));
    if (!std::isfinite(rho)) throw Error(ErrorCode::NonFinite, "flux Jacobian in " + cell_label(m));
    v[m] = rho;
  }
  return v;
}

Eigen::VectorXd Solver::entropy(const HydroState& st) const {
  Eigen::VectorXd s(st.grid.cells);
  for (int m = 0; m < st.grid.cells; ++m) {
    const PotentialVector b = st.beta_at(m);
    const double f = backend_.evaluate(b, {false, false}).f;
    s[m] = entropy_density(b, st.q_at(m), f);
  }
  return s;
}

Eigen::VectorXd Solver::entropy_flux(const HydroState& st) const {
  Eigen::VectorXd out(st.grid.cells);
  if (!backend_.traits().has_fluxes) return out.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (int m = 0; m < st.grid.cells; ++m) {
    const PotentialVector b = st.beta_at(m);
    ThermoPoint p = backend_.evaluate(b, {true, false});
    Averages av = cell_averages(backend_, b, true);
    ChargeMap js = entropy_currents(b, av.j, p.g);
    double sum = 0.0;
    for (const auto& [k, v] : js) sum += fields_.value(k, st.grid.x(m), st.grid.length) * v;
    out[m] = sum;
  }
  return out;
}

namespace {

Snapshot take_snapshot(const Solver& solver, const HydroState& st) {
  return {st.t, st.q, st.beta, solver.entropy(st), solver.entropy_flux(st)};
}

}  // namespace

Trajectory evolve(const Solver& solver_in, HydroState st, const EvolveOptions& opts) {
  Solver solver = solver_in;
  const ThermoBackend& backend = solver.backend();
  const double dx = st.grid.dx();
  const double cfl = solver.options().cfl;

  Trajectory tr;
  tr.grid = st.grid;
  tr.charges = st.charges;
  tr.backend = backend.name();
  tr.scheme = solver.options().scheme;

  invert_all(backend, st, solver.options().invert);
  Eigen::VectorXd speeds = solver.local_speeds(st);
  double dt = opts.dt;
  int steps = 0;
  if (opts.t_end > 0.0) {
    if (dt <= 0.0) {
      const double vmax = std::max(speeds.maxCoeff(), 1e-300);
      dt = 0.9 * cfl * dx / vmax;
    }
    steps = static_cast<int>(std::ceil(opts.t_end / dt - 1e-9));
    dt = opts.t_end / steps;
  }
  tr.dt = dt;
  tr.steps = steps;
  tr.integrated_source = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(st.charges.size()));

  auto record = [&](const HydroState& s) {
    tr.times.push_back(s.t);
    tr.total_entropy.push_back(solver.entropy(s).sum() * dx);
    tr.totals.push_back(s.totals());
  };
  record(st);
  tr.snapshots.push_back(take_snapshot(solver, st));

  for (int step = 0; step < steps; ++step) {
    if (step > 0) speeds = solver.local_speeds(st);
    const double vmax = speeds.maxCoeff();
    tr.v_max = std::max(tr.v_max, vmax);
    if (solver.options().enforce_cfl && dt * vmax > cfl * dx * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "dt = " << dt << " exceeds " << cfl << " dx / v_max = " << cfl * dx / vmax << " at t = " << st.t;
      throw Error(ErrorCode::CFLViolation, msg.str());
    }
    solver.set_dissipation_speeds(speeds);

    RhsResult k1 = solver.rhs(st);
    HydroState s2 = st;
    s2.q += 0.5 * dt * k1.dq;
    RhsResult k2 = solver.rhs(s2);
    HydroState s3 = st;
    s3.beta = s2.beta;
    s3.q += 0.5 * dt * k2.dq;
    RhsResult k3 = solver.rhs(s3);
    HydroState s4 = st;
    s4.beta = s3.beta;
    s4.q += dt * k3.dq;
    RhsResult k4 = solver.rhs(s4);

    st.q += dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    tr.integrated_source += dt / 6.0 * (k1.source + 2.0 * k2.source + 2.0 * k3.source + k4.source);
    st.beta = s4.beta;
    st.t = (step + 1 == steps) ? opts.t_end : st.t + dt;
    invert_all(backend, st, solver.options().invert);
    record(st);
    if ((opts.record_every > 0 && (step + 1) % opts.record_every == 0) || step + 1 == steps)
      tr.snapshots.push_back(take_snapshot(solver, st));
  }
  tr.final_state = std::move(st);
  return tr;
}

SoundWave sound_wave_test(const Solver& solver, const Grid& grid, const PotentialVector& background,
                          double amplitude, double t_end, double dt) {
  if (solver.fields().max_gradient(grid) != 0.0)
    throw Error(ErrorCode::DomainError, "sound wave test needs constant fields");
  const ThermoBackend& backend = solver.backend();
  Eigen::MatrixXd A = flux_jacobian(solver, background, 0.0, grid.length);
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  int pick = 0;
  for (int e = 1; e < es.eigenvalues().size(); ++e)
    if (es.eigenvalues()[e].real() > es.eigenvalues()[pick].real()) pick = e;
  SoundWave out;
  out.predicted = es.eigenvalues()[pick].real();
  Eigen::VectorXd right = es.eigenvectors().col(pick).real();
  Eigen::MatrixXcd Vinv = es.eigenvectors().inverse();
  Eigen::VectorXd left = Vinv.row(pick).real().transpose();
  right /= right.norm();
  left /= left.dot(right);

  HydroState st = state_from_potentials(backend, grid, [&](double) { return background; });
  const Eigen::RowVectorXd q0 = st.q.row(0);
  const double k = 2.0 * std::numbers::pi / grid.length;
  for (int m = 0; m < grid.cells; ++m) st.q.row(m) += amplitude * std::sin(k * grid.x(m)) * right.transpose();

  Trajectory tr = evolve(solver, st, {dt, t_end, 0});
  double sn = 0.0, cs = 0.0;
  for (int m = 0; m < grid.cells; ++m) {
    const double a = left.dot((tr.final_state.q.row(m) - q0).transpose());
    sn += a * std::sin(k * grid.x(m));
    cs += a * std::cos(k * grid.x(m));
  }
  double phase = std::atan2(-cs, sn);
  // branch nearest to the predicted phase; the measurement itself is the residue
  const double guess = out.predicted * k * t_end;
  phase += 2.0 * std::numbers::pi * std::round((guess - phase) / (2.0 * std::numbers::pi));
  out.measured = phase / (k * t_end);
  out.relative_error = std::abs(out.measured - out.predicted) / std::abs(out.predicted);
  return out;
}

EntropyBudget entropy_budget(const Trajectory& tr) {
  EntropyBudget out;
  if (tr.total_entropy.empty()) return out;
  out.initial = tr.total_entropy.front();
  out.delta = std::abs(tr.total_entropy.back() - tr.total_entropy.front());
  for (std::size_t n = 1; n < tr.total_entropy.size(); ++n) {
    out.max_change = std::max(out.max_change, std::abs(tr.total_entropy[n] - out.initial));
    const double h = tr.times[n] - tr.times[n - 1];
    if (h > 0.0) out.max_rate = std::max(out.max_rate, std::abs(tr.total_entropy[n] - tr.total_entropy[n - 1]) / h);
  }
  return out;
}

double charge_budget_residual(const Trajectory& tr) {
  if (tr.totals.empty()) return 0.0;
  const Eigen::VectorXd& q0 = tr.totals.front();
  Eigen::VectorXd diff = tr.totals.back() - q0 - tr.integrated_source;
  double worst = 0.0;
  for (Eigen::Index a = 0; a < diff.size(); ++a)
    worst = std::max(worst, std::abs(diff[a]) / std::max(1.0, std::abs(q0[a])));
  return worst;
}

double max_drift(const Trajectory& tr) {
  if (tr.snapshots.size() < 2) return 0.0;
  return (tr.snapshots.back().q - tr.snapshots.front().q).cwiseAbs().maxCoeff();
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw Error(ErrorCode::DimensionMismatch, "observed_orders: size mismatch");
  std::vector<double> out;
  for (std::size_t a = 0; a + 1 < h.size(); ++a) out.push_back(std::log(err[a] / err[a + 1]) / std::log(h[a] / h[a + 1]));
  return out;
}

std::string snapshot_csv(const Trajectory& tr, const Snapshot& snap) {
  std::ostringstream out;
  out.precision(17);
  out << "x";
  for (ChargeIndex k : tr.charges) out << ",q" << k;
  for (ChargeIndex k : tr.charges) out << ",beta" << k;
  out << ",s,entropy_flux\n";
  for (int m = 0; m < tr.grid.cells; ++m) {
    out << tr.grid.x(m);
    for (Eigen::Index a = 0; a < snap.q.cols(); ++a) out << ',' << snap.q(m, a);
    for (Eigen::Index a = 0; a < snap.beta.cols(); ++a) out << ',' << snap.beta(m, a);
    out << ',' << snap.s[m] << ',' << snap.entropy_flux[m] << '\n';
  }
  return out.str();
}

nlohmann::json manifest(const Trajectory& tr) {
  nlohmann::json j;
  j["backend"] = tr.backend;
  j["cells"] = tr.grid.cells;
  j["length"] = tr.grid.length;
  j["dx"] = tr.grid.dx();
  j["scheme"] = to_string(tr.scheme);
  j["dt"] = tr.dt;
  j["steps"] = tr.steps;
  j["v_max"] = tr.v_max;
  j["charges"] = tr.charges;
  const EntropyBudget eb = entropy_budget(tr);
  j["entropy"] = {{"initial", eb.initial}, {"delta", eb.delta}, {"max_change", eb.max_change}, {"max_rate", eb.max_rate}};
  j["charge_budget_residual"] = charge_budget_residual(tr);
  j["max_drift"] = max_drift(tr);
  std::vector<double> times;
  for (const auto& s : tr.snapshots) times.push_back(s.t);
  j["snapshot_times"] = times;
  return j;
}

}  // namespace ekms::hydro
