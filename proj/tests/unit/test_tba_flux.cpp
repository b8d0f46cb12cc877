#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include "doctest.h"
#include "ekms/checks.hpp"
#include "ekms/error.hpp"
#include "ekms/report.hpp"
#include "ekms/tba/backend.hpp"
#include "ekms/tba/checks.hpp"

using namespace ekms;
using namespace ekms::tba;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double line_integral(F f) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  return integrator.integrate([&](double t) { return std::abs(t) > 60 ? 0.0 : f(t); }, 1e-15);
}

double w_of(const PotentialVector& b, double t) {
  double w = 0;
  for (auto [k, v] : b.entries()) w += v * (k == 0 ? 1.0 : std::pow(t, k) / k);
  return w;
}
double h(int k, double t) { return k == 0 ? 1.0 : std::pow(t, k) / k; }
double hp(int k, double t) { return k == 0 ? 0.0 : std::pow(t, k - 1); }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<PotentialVector> random_states(std::size_t n, unsigned seed, bool quartic) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> b2(0.5, 2.0), b0(-1.0, 1.0), small(-0.2, 0.2), b4(0.05, 0.5);
  std::vector<PotentialVector> out;
  for (std::size_t s = 0; s < n; ++s) {
    PotentialVector b{{0, b0(rng)}, {1, small(rng)}, {2, b2(rng)}};
    if (quartic) b.set(4, b4(rng));
    out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("free classical gas against the Gaussian closed form") {
  TbaBackend be(free_classical({0, 1, 2}));
  for (auto b : random_states(5, 7, false)) {
    const double b0 = b.get(0), b1 = b.get(1), b2 = b.get(2);
    const double I = std::sqrt(2 * kPi / b2) * std::exp(-b0 + b1 * b1 / (2 * b2));
    const double mean = -b1 / b2, var = 1 / b2;
    auto tp = be.evaluate(b, {.fluxes = true, .averages = true});
    CHECK(rel(tp.f, -I) < 1e-12);
    CHECK(rel(tp.g.at(1), -I) < 1e-12);
    CHECK(rel(tp.g.at(2), -I * mean) < 1e-12);
    CHECK(tp.g.at(0) == 0.0);
    const auto& av = *tp.averages;
    CHECK(rel(av.q.at(0), I) < 1e-12);
    CHECK(rel(av.q.at(1), I * mean) < 1e-12);
    CHECK(rel(av.q.at(2), I * (var + mean * mean) / 2) < 1e-12);
    CHECK(rel(av.j.at({2, 0}), I * mean) < 1e-12);
  }
}

TEST_CASE("free fermion averages against direct quadrature") {
  TbaBackend be(free_fermion());
  for (auto b : random_states(5, 8, true)) {
    auto n = [&](double t) {
      const double e = std::exp(-w_of(b, t));
      return e / (1 + e);
    };
    auto tp = be.evaluate(b, {.fluxes = true, .averages = true});
    const double f = -line_integral([&](double t) { return std::log1p(std::exp(-w_of(b, t))); }) / (2 * kPi);
    CHECK(rel(tp.f, f) < 1e-12);
    for (int k : {1, 2, 4})
      CHECK(rel(tp.g.at(k), -line_integral([&](double t) { return hp(k, t) * std::log1p(std::exp(-w_of(b, t))); }) /
                               (2 * kPi)) < 1e-12);
    for (int i : {0, 1, 2, 4}) {
      CHECK(rel(tp.averages->q.at(i), line_integral([&](double t) { return h(i, t) * n(t); }) / (2 * kPi)) < 1e-12);
      for (int k : {1, 2, 4})
        CHECK(rel(tp.averages->j.at({k, i}), line_integral([&](double t) { return hp(k, t) * h(i, t) * n(t); }) /
                                                 (2 * kPi)) < 1e-12);
    }
    auto C = *be.covariance(b);
    const std::vector<int> cs{0, 1, 2, 4};
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c)
        CHECK(rel(C(a, c), line_integral([&](double t) {
                    return h(cs[a], t) * h(cs[c], t) * n(t) * (1 - n(t));
                  }) / (2 * kPi)) < 1e-12);
  }
}

TEST_CASE("free fermion B tensor against quadrature") {
  TbaBackend be(free_fermion({0, 1, 2}));
  PotentialVector b{{2, 1.0}};
  auto B = b_matrix(be, b);
  auto nn = [&](double t) {
    const double e = std::exp(-w_of(b, t));
    return e / ((1 + e) * (1 + e));
  };
  const std::vector<int> cs{0, 1, 2};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double exact = line_integral([&](double t) { return hp(2, t) * h(cs[i], t) * h(cs[j], t) * nn(t); }) / (2 * kPi);
      CHECK(std::abs(B.at(2)(i, j) - exact) < 1e-6);
    }
}

TEST_CASE("hard rods with a = 0 reproduce the free classical report") {
  PotentialVector b{{0, 0.2}, {1, -0.1}, {2, 1.3}};
  auto r1 = assemble_report(TbaBackend(hard_rods(0.0, {0, 1, 2})), b);
  auto r2 = assemble_report(TbaBackend(free_classical({0, 1, 2})), b);
  CHECK(rel(r1.f, r2.f) < 1e-9);
  for (auto [k, v] : r2.g) CHECK(rel(r1.g.at(k), v) < 1e-9);
  for (auto [key, v] : r2.j_avg) CHECK(rel(r1.j_avg.at(key), v) < 1e-9);
  CHECK(rel(r1.s, r2.s) < 1e-9);
}

TEST_CASE("g1 = f and dressing averages agree with differenced fluxes on every model") {
  for (const auto& name : registered_models()) {
    TbaBackend be(make_model(name));
    for (auto b : random_states(5, 21, true)) {
      INFO(name << " " << b.to_string());
      auto tp = be.evaluate(b, {.fluxes = true, .averages = false});
      CHECK(rel(tp.g.at(1), tp.f) <= 1e-9);
      auto cur = currents_from_flux(be, b);
      CHECK(cur.analytic);
      CHECK(cur.cross_check_residual <= 1e-7);
      auto q = densities_from_free_energy(be, b);
      auto av = *be.evaluate(b, {.fluxes = false, .averages = true}).averages;
      for (auto [i, v] : q) CHECK(rel(av.q.at(i), v) <= 1e-7);
    }
  }
}

TEST_CASE("momentum flow currents equal densities and parity zeros") {
  for (const auto& name : registered_models()) {
    TbaBackend be(make_model(name));
    PotentialVector even{{0, -0.3}, {2, 1.1}, {4, 0.1}};
    auto tp = be.evaluate(even, {.fluxes = true, .averages = true});
    const auto& av = *tp.averages;
    for (int i : {0, 1, 2, 4}) CHECK(std::abs(av.j.at({1, i}) - av.q.at(i)) <= 1e-12 * std::max(1.0, std::abs(av.q.at(i))));
    CHECK(std::abs(tp.g.at(2)) <= 1e-12);
    CHECK(std::abs(av.q.at(1)) <= 1e-12);
    CHECK(std::abs(av.j.at({2, 2})) <= 1e-12);
    CHECK(tp.g.at(0) == 0.0);
  }
}

TEST_CASE("analytic covariance is the derivative of the analytic densities") {
  for (const auto& name : registered_models()) {
    TbaBackend be(make_model(name, {}, {0, 1, 2}));
    PotentialVector b{{0, 0.1}, {1, 0.15}, {2, 0.9}};
    auto C = *be.covariance(b);
    const std::vector<int> cs{0, 1, 2};
    for (int j = 0; j < 3; ++j) {
      const double d = 1e-4;
      auto up = be.evaluate(b.shifted(cs[j], d), {.fluxes = false, .averages = true}).averages->q;
      auto dn = be.evaluate(b.shifted(cs[j], -d), {.fluxes = false, .averages = true}).averages->q;
      for (int i = 0; i < 3; ++i) CHECK(std::abs(C(i, j) + (up[cs[i]] - dn[cs[i]]) / (2 * d)) < 1e-6);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("EKMS and the intermediate chain on Lieb-Liniger and hard rods") {
  for (auto model : {lieb_liniger(1.0), hard_rods(1.0)}) {
    TbaBackend be(model);
    auto states = random_states(10, 5, true);
    CHECK(check_ekms(be, states, 1e-7).pass);
    for (const auto& b : states) CHECK(check_ekms_chain(model, be.solve(b)).pass);
  }
}

TEST_CASE("spectral convergence of f in the node count") {
  auto model = lieb_liniger(1.0);
  PotentialVector b{{0, 0.0}, {2, 1.0}};
  SolverOptions o;
  o.cutoff = 12.0;
  o.nodes = 400;
  const double ref = free_energy(model, solve_pseudo_energy(model, b, o));
  std::vector<double> err;
  for (std::size_t M : {12u, 24u, 48u}) {
    o.nodes = M;
    err.push_back(std::abs(free_energy(model, solve_pseudo_energy(model, b, o)) - ref));
  }
  CHECK(err[0] / err[1] >= 10);
  CHECK(err[1] / std::max(err[2], 1e-16) >= 10);
}

TEST_CASE("unitarity: registered kernels pass, the factorised counterexample fails") {
  auto grid = gauss_legendre(60, 6.0);
  for (const auto& name : registered_models()) CHECK(check_unitarity(make_model(name), grid).pass);

  TbaModel fixture = lieb_liniger(1.0);
  fixture.name = "non-unitary";
  fixture.kernel = [](double tp, double t) { return tp * t * t; };
  fixture.kernel_dtheta = nullptr;
  auto r = check_unitarity(fixture, grid);
  CHECK_FALSE(r.pass);
  CHECK(r.residual > 1.0);
}

TEST_CASE("backend domain") {
  TbaBackend be(lieb_liniger(1.0));
  CHECK(be.admissible(PotentialVector{{2, 1.0}}));
  CHECK_FALSE(be.admissible(PotentialVector{{2, -1.0}}));
  CHECK_FALSE(be.admissible(PotentialVector{{2, 1.0}, {4, -0.1}}));
  CHECK_FALSE(be.admissible(PotentialVector{{2, 1.0}, {0, 9.0}}));
  CHECK_FALSE(be.admissible(PotentialVector{{2, 1.0}, {3, 0.1}}));
  CHECK_THROWS_AS(assemble_report(be, PotentialVector{{0, 0.0}, {2, 0.0}}), Error);
  CHECK_THROWS_AS(free_energy_flux(lieb_liniger(1.0), be.solve(PotentialVector{{2, 1.0}}), 11), Error);
}
