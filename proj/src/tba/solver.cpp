#include "ekms/tba/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ekms/error.hpp"
#include "ekms/simd/kernels.hpp"

namespace ekms::tba {

namespace {

// Row n holds prefactor * w_m * phi(theta_m, theta_n).
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> kernel_matrix(const TbaModel& model,
                                                                                     const QuadratureGrid& grid) {
  const std::size_t M = grid.size();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> K(M, M);
  for (std::size_t n = 0; n < M; ++n)
    for (std::size_t m = 0; m < M; ++m)
      K(n, m) = model.measure_prefactor * grid.weights[m] * model.phi(grid.nodes[m], grid.nodes[n]);
  return K;
}

std::vector<double> free_values(const TbaModel& model, const PseudoEnergy& pe) {
  std::vector<double> F(pe.eps.size());
  for (std::size_t m = 0; m < F.size(); ++m) F[m] = free_function(model.statistics, pe.eps[m]);
  return F;
}

// Highest-order term of the driving function; positive even leading term means growth at both edges.
void require_confining(const PotentialVector& beta) {
  ChargeIndex top = -1;
  for (const auto& [k, b] : beta.entries())
    if (b != 0.0) top = std::max(top, k);
  if (top <= 0 || top % 2 != 0 || beta.get(top) <= 0.0)
    throw Error(ErrorCode::DomainError, "driving term unbounded below for " + beta.to_string());
}

}  // namespace

double driving_term(const PotentialVector& beta, double theta) {
  double w = 0.0;
  for (const auto& [k, b] : beta.entries()) w += b * one_particle(k, theta);
  return w;
}

double driving_slope(const PotentialVector& beta, double theta) {
  double w = 0.0;
  for (const auto& [k, b] : beta.entries()) w += b * one_particle_derivative(k, theta);
  return w;
}

PseudoEnergy solve_pseudo_energy(const TbaModel& model, const PotentialVector& beta, const QuadratureGrid& grid,
                                 const SolverOptions& opts) {
  if (!grid.valid()) throw Error(ErrorCode::DomainError, "invalid quadrature grid");
  require_confining(beta);

  const std::size_t M = grid.size();
  PseudoEnergy pe;
  pe.grid = grid;
  pe.beta = beta;
  std::vector<double> drive(M);
  for (std::size_t m = 0; m < M; ++m) drive[m] = driving_term(beta, grid.nodes[m]);
  pe.eps = drive;

  if (model.zero_kernel) {
    pe.converged = true;
    pe.iterations = 1;
    return pe;
  }

  const auto K = kernel_matrix(model, grid);
  std::vector<double> F(M), rhs(M), trial(M);
  double lambda = opts.damping;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    for (std::size_t m = 0; m < M; ++m) F[m] = free_function(model.statistics, pe.eps[m]);
    simd::matvec(K.data(), F.data(), rhs.data(), M, M);
    for (std::size_t m = 0; m < M; ++m) rhs[m] += drive[m];
    trial = pe.eps;
    double res = simd::damped_update(trial.data(), rhs.data(), lambda, M);
    pe.iterations = it;
    pe.residual = res;
    if (!std::isfinite(res)) throw Error(ErrorCode::NonFinite, "pseudo-energy iteration diverged");
    if (res <= opts.tol) {
      pe.converged = true;
      return pe;
    }
    if (opts.adaptive_damping && res > previous) lambda = std::max(lambda * 0.5, 1.0 / 1024.0);
    previous = res;
    pe.eps.swap(trial);
  }
  throw Error(ErrorCode::NoConvergence, "pseudo-energy residual " + std::to_string(pe.residual) + " after " +
                                            std::to_string(opts.max_iters) + " iterations");
}

PseudoEnergy solve_pseudo_energy(const TbaModel& model, const PotentialVector& beta, const SolverOptions& opts) {
  require_confining(beta);
  if (opts.cutoff > 0.0) return solve_pseudo_energy(model, beta, gauss_legendre(opts.nodes, opts.cutoff), opts);

  // Smallest half-integer cutoff where the bare driving term is large at both edges.
  double cutoff = 1.0;
  while (std::min(driving_term(beta, cutoff), driving_term(beta, -cutoff)) < 40.0) {
    cutoff += 0.5;
    if (cutoff > 1e4) throw Error(ErrorCode::DomainError, "driving term too flat for a finite cutoff");
  }
  for (int expansion = 0; expansion < 40; ++expansion) {
    PseudoEnergy pe = solve_pseudo_energy(model, beta, gauss_legendre(opts.nodes, cutoff), opts);
    double edge = std::max(std::abs(free_function(model.statistics, interpolate(model, pe, cutoff))),
                           std::abs(free_function(model.statistics, interpolate(model, pe, -cutoff))));
    if (edge <= opts.edge_tol && tail_estimate(model, pe) <= opts.tail_tol) return pe;
    cutoff *= 1.25;
  }
  throw Error(ErrorCode::DomainError, "cutoff expansion failed for " + beta.to_string());
}

double interpolate(const TbaModel& model, const PseudoEnergy& pe, double theta) {
  double e = driving_term(pe.beta, theta);
  if (model.zero_kernel) return e;
  const auto& g = pe.grid;
  for (std::size_t m = 0; m < g.size(); ++m)
    e += model.measure_prefactor * g.weights[m] * model.phi(g.nodes[m], theta) *
         free_function(model.statistics, pe.eps[m]);
  return e;
}

double slope(const TbaModel& model, const PseudoEnergy& pe, double theta) {
  double e = driving_slope(pe.beta, theta);
  if (model.zero_kernel) return e;
  const auto& g = pe.grid;
  for (std::size_t m = 0; m < g.size(); ++m)
    e += model.measure_prefactor * g.weights[m] * model.dphi(g.nodes[m], theta) *
         free_function(model.statistics, pe.eps[m]);
  return e;
}

double tail_estimate(const TbaModel& model, const PseudoEnergy& pe) {
  ChargeIndex top = 1;
  for (ChargeIndex k : model.charges) top = std::max(top, k);
  const double L = pe.grid.cutoff;
  const double weight = std::max(1.0, std::pow(L, top));
  double worst = 0.0;
  for (double edge : {L, -L}) {
    double F = std::abs(free_function(model.statistics, interpolate(model, pe, edge)));
    double grow = std::abs(slope(model, pe, edge));
    worst = std::max(worst, model.measure_prefactor * F * weight / std::max(grow, 1e-3));
  }
  return worst;
}

double free_energy_flux(const TbaModel& model, const PseudoEnergy& pe, ChargeIndex k) {
  if (!supported_charge(k)) throw Error(ErrorCode::UnknownChargeIndex, "charge " + std::to_string(k));
  if (k == 0) return 0.0;
  const auto& g = pe.grid;
  std::vector<double> hp(g.size()), F = free_values(model, pe);
  for (std::size_t m = 0; m < g.size(); ++m) hp[m] = one_particle_derivative(k, g.nodes[m]);
  return model.measure_prefactor * simd::weighted_dot3(g.weights.data(), hp.data(), F.data(), g.size());
}

double free_energy(const TbaModel& model, const PseudoEnergy& pe) {
  // int F dtheta = [theta F]_edges - int theta n eps' dtheta
  const auto& g = pe.grid;
  const double L = g.cutoff;
  const double boundary = L * free_function(model.statistics, interpolate(model, pe, L)) +
                          L * free_function(model.statistics, interpolate(model, pe, -L));
  std::vector<double> tn(g.size()), ds(g.size());
  const auto F = free_values(model, pe);
  for (std::size_t m = 0; m < g.size(); ++m) {
    tn[m] = g.nodes[m] * occupation(model.statistics, pe.eps[m]);
    double e = driving_slope(pe.beta, g.nodes[m]);
    if (!model.zero_kernel)
      for (std::size_t p = 0; p < g.size(); ++p)
        e += model.measure_prefactor * g.weights[p] * model.dphi(g.nodes[p], g.nodes[m]) * F[p];
    ds[m] = e;
  }
  return model.measure_prefactor * (boundary - simd::weighted_dot3(g.weights.data(), tn.data(), ds.data(), g.size()));
}

std::vector<double> occupations(const TbaModel& model, const PseudoEnergy& pe) {
  std::vector<double> n(pe.eps.size());
  for (std::size_t m = 0; m < n.size(); ++m) n[m] = occupation(model.statistics, pe.eps[m]);
  return n;
}

Dresser::Dresser(const TbaModel& model, const PseudoEnergy& pe) {
  const std::size_t M = pe.grid.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M, M);
  if (!model.zero_kernel) {
    auto K = kernel_matrix(model, pe.grid);
    const auto n = occupations(model, pe);
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t m = 0; m < M; ++m) A(r, m) -= K(r, m) * n[m];
  }
  lu_.compute(A);
  if (!(lu_.rcond() > 1e-13)) throw Error(ErrorCode::SingularSystem, "dressing operator is numerically singular");
}

std::vector<double> Dresser::operator()(const std::vector<double>& h) const {
  Eigen::Map<const Eigen::VectorXd> rhs(h.data(), static_cast<Eigen::Index>(h.size()));
  Eigen::VectorXd x = lu_.solve(rhs);
  return {x.data(), x.data() + x.size()};
}

std::vector<double> dress(const TbaModel& model, const PseudoEnergy& pe, const std::vector<double>& h) {
  return Dresser(model, pe)(h);
}

namespace {

std::vector<double> sample(const QuadratureGrid& g, ChargeIndex k, bool derivative) {
  std::vector<double> v(g.size());
  for (std::size_t m = 0; m < g.size(); ++m)
    v[m] = derivative ? one_particle_derivative(k, g.nodes[m]) : one_particle(k, g.nodes[m]);
  return v;
}

}  // namespace

Averages analytic_averages(const TbaModel& model, const PseudoEnergy& pe) {
  const auto& g = pe.grid;
  const Dresser dr(model, pe);
  const auto n = occupations(model, pe);
  std::vector<double> wn(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) wn[m] = g.weights[m] * n[m];

  std::map<ChargeIndex, std::vector<double>> bare, dressed_slope;
  for (ChargeIndex k : model.charges) {
    bare[k] = sample(g, k, false);
    dressed_slope[k] = k == 0 ? std::vector<double>(g.size(), 0.0) : dr(sample(g, k, true));
  }
  const std::vector<double> one_dr = dr(sample(g, 1, true));

  Averages out;
  for (ChargeIndex i : model.charges) {
    out.q[i] = model.measure_prefactor * simd::weighted_dot3(wn.data(), one_dr.data(), bare[i].data(), g.size());
    for (ChargeIndex k : model.charges)
      out.j[{k, i}] = k == 0 ? 0.0
                             : model.measure_prefactor *
                                   simd::weighted_dot3(wn.data(), dressed_slope[k].data(), bare[i].data(), g.size());
  }
  return out;
}

Eigen::MatrixXd analytic_covariance(const TbaModel& model, const PseudoEnergy& pe) {
  const auto& g = pe.grid;
  const Dresser dr(model, pe);
  const std::vector<double> one_dr = dr(sample(g, 1, true));
  std::vector<double> weight(g.size());
  for (std::size_t m = 0; m < g.size(); ++m)
    weight[m] = g.weights[m] * occupation_slope(model.statistics, pe.eps[m]) * one_dr[m];

  const auto& cs = model.charges;
  std::vector<std::vector<double>> hdr;
  for (ChargeIndex k : cs) hdr.push_back(dr(sample(g, k, false)));
  Eigen::MatrixXd C(cs.size(), cs.size());
  for (std::size_t a = 0; a < cs.size(); ++a)
    for (std::size_t b = a; b < cs.size(); ++b)
      C(a, b) = C(b, a) =
          model.measure_prefactor * simd::weighted_dot3(weight.data(), hdr[a].data(), hdr[b].data(), g.size());
  return C;
}

std::string pseudo_energy_csv(const TbaModel& model, const PseudoEnergy& pe) {
  std::ostringstream out;
  out << "theta,epsilon,occupation\n";
  char buf[128];
  for (std::size_t m = 0; m < pe.grid.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pe.grid.nodes[m], pe.eps[m],
                  occupation(model.statistics, pe.eps[m]));
    out << buf;
  }
  return out.str();
}

}  // namespace ekms::tba
