#include "ekms/differentiation.hpp"

#include <algorithm>
#include <cmath>

#include "ekms/error.hpp"

namespace ekms {

namespace {

void check_finite(const Eigen::VectorXd& v, const PotentialVector& at) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFinite, "backend returned a non-finite value at " + at.to_string());
}

Eigen::VectorXd richardson_combine(const Eigen::VectorXd& coarse, const Eigen::VectorXd& fine, const DiffOptions& opts) {
  if (!opts.richardson) return fine;
  Eigen::VectorXd extrapolated = (4.0 * fine - coarse) / 3.0;
  for (Eigen::Index n = 0; n < extrapolated.size(); ++n) {
    double scale = std::max(1.0, std::abs(extrapolated[n]));
    if (std::abs(extrapolated[n] - fine[n]) > 100.0 * opts.ill_conditioned_rel * scale)
      throw Error(ErrorCode::IllConditioned, "Richardson estimate disagrees with the fine stencil");
  }
  return extrapolated;
}

ChargeMap flux_map(const ThermoBackend& backend, const PotentialVector& beta) {
  ThermoPoint p = backend.evaluate(beta, {.fluxes = true, .averages = false});
  if (p.g.empty()) throw Error(ErrorCode::DomainError, backend.name() + " does not provide free energy fluxes");
  return p.g;
}

}  // namespace

double coordinate_step(double delta, double value) { return delta * std::max(1.0, std::abs(value)); }

void require_admissible(const ThermoBackend& backend, const PotentialVector& beta) {
  for (const auto& [i, v] : beta.entries()) {
    auto cs = backend.charges();
    if (std::find(cs.begin(), cs.end(), i) == cs.end())
      throw Error(ErrorCode::UnknownChargeIndex, "charge " + std::to_string(i) + " not declared by " + backend.name());
  }
  if (!beta.finite()) throw Error(ErrorCode::NonFinite, "potential vector has non-finite entries");
  if (!backend.admissible(beta))
    throw Error(ErrorCode::DomainExceeded, beta.to_string() + " is outside the domain of " + backend.name());
}

Eigen::VectorXd central_derivative(const std::function<Eigen::VectorXd(const PotentialVector&)>& fn,
                                   const PotentialVector& beta, ChargeIndex dir, double delta,
                                   const DiffOptions& opts,
                                   const std::function<bool(const PotentialVector&)>& admissible) {
  const double h = coordinate_step(delta, beta.get(dir));
  auto eval = [&](double offset) {
    PotentialVector p = beta.shifted(dir, offset);
    if (!admissible(p)) throw Error(ErrorCode::DomainExceeded, "stencil point " + p.to_string() + " leaves the domain");
    Eigen::VectorXd v = fn(p);
    check_finite(v, p);
    return v;
  };
  Eigen::VectorXd coarse = (eval(h) - eval(-h)) / (2.0 * h);
  if (!opts.richardson) return coarse;
  Eigen::VectorXd fine = (eval(0.5 * h) - eval(-0.5 * h)) / h;
  return richardson_combine(coarse, fine, opts);
}

Eigen::VectorXd mixed_second_derivative(const std::function<Eigen::VectorXd(const PotentialVector&)>& fn,
                                        const PotentialVector& beta, ChargeIndex a, ChargeIndex b,
                                        const DiffOptions& opts,
                                        const std::function<bool(const PotentialVector&)>& admissible) {
  auto eval = [&](double da, double db) {
    PotentialVector p = beta.shifted(a, da);
    p = p.shifted(b, db);
    if (!admissible(p)) throw Error(ErrorCode::DomainExceeded, "stencil point " + p.to_string() + " leaves the domain");
    Eigen::VectorXd v = fn(p);
    check_finite(v, p);
    return v;
  };
  auto stencil = [&](double scale) -> Eigen::VectorXd {
    const double ha = scale * coordinate_step(opts.second_step, beta.get(a));
    const double hb = scale * coordinate_step(opts.second_step, beta.get(b));
    if (a == b) return (eval(ha, 0) - 2.0 * eval(0, 0) + eval(-ha, 0)) / (ha * ha);
    return (eval(ha, hb) - eval(ha, -hb) - eval(-ha, hb) + eval(-ha, -hb)) / (4.0 * ha * hb);
  };
  Eigen::VectorXd coarse = stencil(1.0);
  if (!opts.richardson) return coarse;
  return richardson_combine(coarse, stencil(0.5), opts);
}

CurrentsResult currents_from_flux(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts) {
  require_admissible(backend, beta);
  const auto charges = backend.charges();
  const auto admissible = [&](const PotentialVector& p) { return backend.admissible(p); };
  auto flux_vector = [&](const PotentialVector& p) {
    ChargeMap g = flux_map(backend, p);
    Eigen::VectorXd v(charges.size());
    for (std::size_t k = 0; k < charges.size(); ++k) v[k] = g.at(charges[k]);
    return v;
  };

  CurrentsResult out;
  for (ChargeIndex i : charges) {
    Eigen::VectorXd d = central_derivative(flux_vector, beta, i, opts.first_step, opts, admissible);
    for (std::size_t k = 0; k < charges.size(); ++k) out.finite_difference[{charges[k], i}] = d[k];
  }
  out.values = out.finite_difference;

  if (backend.traits().has_analytic_currents) {
    ThermoPoint p = backend.evaluate(beta, {.fluxes = false, .averages = true});
    if (p.averages) {
      out.analytic = true;
      out.values = p.averages->j;
      for (const auto& [key, fd] : out.finite_difference) {
        double a = out.values.at(key);
        out.cross_check_residual = std::max(out.cross_check_residual, std::abs(a - fd) / std::max(1.0, std::abs(a)));
      }
    }
  }
  return out;
}

ChargeMap densities_from_free_energy(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts) {
  require_admissible(backend, beta);
  const auto admissible = [&](const PotentialVector& p) { return backend.admissible(p); };
  auto f_fn = [&](const PotentialVector& p) {
    Eigen::VectorXd v(1);
    v[0] = backend.evaluate(p, {.fluxes = false, .averages = false}).f;
    return v;
  };
  ChargeMap q;
  for (ChargeIndex i : backend.charges()) q[i] = central_derivative(f_fn, beta, i, opts.first_step, opts, admissible)[0];
  return q;
}

BTensor b_matrix(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts) {
  require_admissible(backend, beta);
  const auto charges = backend.charges();
  const std::size_t n = charges.size();
  const auto admissible = [&](const PotentialVector& p) { return backend.admissible(p); };

  BTensor out;
  for (ChargeIndex k : charges) out[k] = Eigen::MatrixXd::Zero(n, n);

  if (backend.traits().has_analytic_currents) {
    // Flattened (k, i) currents differentiated once.
    auto currents = [&](const PotentialVector& p) {
      ThermoPoint tp = backend.evaluate(p, {.fluxes = false, .averages = true});
      if (!tp.averages) throw Error(ErrorCode::DomainError, backend.name() + " did not return analytic currents");
      Eigen::VectorXd v(n * n);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) v[k * n + i] = tp.averages->j.at({charges[k], charges[i]});
      return v;
    };
    for (std::size_t j = 0; j < n; ++j) {
      Eigen::VectorXd d = central_derivative(currents, beta, charges[j], opts.first_step, opts, admissible);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) out[charges[k]](i, j) = -d[k * n + i];
    }
    return out;
  }

  auto flux_vector = [&](const PotentialVector& p) {
    ChargeMap g = flux_map(backend, p);
    Eigen::VectorXd v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = g.at(charges[k]);
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Eigen::VectorXd d = mixed_second_derivative(flux_vector, beta, charges[i], charges[j], opts, admissible);
      for (std::size_t k = 0; k < n; ++k) {
        out[charges[k]](i, j) = -d[k];
        out[charges[k]](j, i) = -d[k];
      }
    }
  }
  return out;
}

Eigen::MatrixXd static_covariance(const ThermoBackend& backend, const PotentialVector& beta, const DiffOptions& opts) {
  require_admissible(backend, beta);
  if (auto c = backend.covariance(beta)) return *c;

  const auto charges = backend.charges();
  const std::size_t n = charges.size();
  const auto admissible = [&](const PotentialVector& p) { return backend.admissible(p); };
  Eigen::MatrixXd C(n, n);

  if (backend.traits().has_analytic_currents) {
    auto densities = [&](const PotentialVector& p) {
      ThermoPoint tp = backend.evaluate(p, {.fluxes = false, .averages = true});
      if (!tp.averages) throw Error(ErrorCode::DomainError, backend.name() + " did not return analytic averages");
      Eigen::VectorXd v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = tp.averages->q.at(charges[i]);
      return v;
    };
    for (std::size_t j = 0; j < n; ++j) C.col(j) = -central_derivative(densities, beta, charges[j], opts.first_step, opts, admissible);
    return C;
  }

  auto f_fn = [&](const PotentialVector& p) {
    Eigen::VectorXd v(1);
    v[0] = backend.evaluate(p, {.fluxes = false, .averages = false}).f;
    return v;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double d = mixed_second_derivative(f_fn, beta, charges[i], charges[j], opts, admissible)[0];
      C(i, j) = C(j, i) = -d;
    }
  return C;
}

}  // namespace ekms
