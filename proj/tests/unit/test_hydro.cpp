#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ekms/cft/cft.hpp"
#include "ekms/error.hpp"
#include "ekms/hydro/few_charge.hpp"
#include "ekms/hydro/solver.hpp"
#include "ekms/tba/backend.hpp"

using namespace ekms;
using namespace ekms::hydro;

namespace {

constexpr double kPi = std::numbers::pi;

FieldProfile bump_energy_field() {
  FieldProfile f;
  f.terms[2] = {parse_primitive("constant 1"), parse_primitive("bump 0.3 0.5 0.15")};
  return f;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ekms::Error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("field primitives") {
  auto c = parse_primitive("constant 2.5");
  CHECK(c.value(0.3, 1.0) == 2.5);
  CHECK(c.derivative(0.3, 1.0) == 0.0);
  auto cs = parse_primitive("cosine 0.5 2 0.1");
  CHECK(cs.value(0.2, 1.0) == doctest::Approx(0.5 * std::cos(4 * kPi * 0.2 + 0.1)));
  auto b = parse_primitive("bump 1 0.25 0.1");
  CHECK(b.value(0.25, 1.0) == doctest::Approx(1.0));
  CHECK(b.value(0.75, 1.0) == doctest::Approx(std::exp(-2 / std::pow(2 * kPi * 0.1, 2))));
  // periodic and smooth
  for (const auto& p : {cs, b}) {
    CHECK(p.value(0.0, 1.0) == doctest::Approx(p.value(1.0, 1.0)).epsilon(1e-14));
    for (double x : {0.1, 0.33, 0.8}) {
      const double h = 1e-5;
      CHECK(p.derivative(x, 1.0) == doctest::Approx((p.value(x + h, 1.0) - p.value(x - h, 1.0)) / (2 * h)).epsilon(1e-7));
    }
  }
  CHECK(code_of([] { parse_primitive("wiggle 1"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_primitive("bump 1 0.5"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_primitive("constant x"); }) == ErrorCode::ConfigError);
}

TEST_CASE("field validation") {
  Grid g{32, 1.0};
  auto f = bump_energy_field();
  CHECK_NOTHROW(f.validate(g));
  CHECK(f.max_gradient(g) > 0);
  CHECK(FieldProfile::constant({{2, 1.0}}).max_gradient(g) == 0.0);
  FieldProfile neg;
  neg.terms[2] = {parse_primitive("cosine 1 1")};
  CHECK(code_of([&] { neg.validate(g); }) == ErrorCode::DomainError);
  FieldProfile nan;
  nan.terms[2] = {parse_primitive("constant 1")};
  nan.terms[2][0].amplitude = std::nan("");
  CHECK(code_of([&] { nan.validate(g); }) == ErrorCode::NonFinite);
}

TEST_CASE("Newton inversion round trips and matches the CFT closed form") {
  cft::CftBackend be(2);
  for (auto [b1, b2] : {std::pair{0.0, 1.0}, std::pair{-0.75, 1.25}, std::pair{0.6, 0.8}}) {
    PotentialVector star{{1, b1}, {2, b2}};
    auto q = cell_averages(be, star, false).q;
    auto got = invert_state(be, q, PotentialVector{{1, 0.0}, {2, 1.0}});
    CHECK(got.get(1) == doctest::Approx(b1).epsilon(1e-10));
    CHECK(got.get(2) == doctest::Approx(b2).epsilon(1e-10));
    auto closed = cft::cft_from_densities(q.at(1), q.at(2), 2);
    CHECK(got.get(1) == doctest::Approx(closed.beta1()).epsilon(1e-10));
    CHECK(got.get(2) == doctest::Approx(closed.beta2()).epsilon(1e-10));
  }
  CHECK(code_of([&] { invert_state(be, {{1, 0.0}, {2, -1.0}}, PotentialVector{{1, 0.0}, {2, 1.0}}, {}, 7); }) ==
        ErrorCode::InversionFailure);
  try {
    invert_state(be, {{1, 0.0}, {2, -1.0}}, PotentialVector{{1, 0.0}, {2, 1.0}}, {}, 7);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
}

TEST_CASE("Newton inversion on a TBA backend") {
  tba::TbaBackend be(tba::hard_rods(1.0, {0, 1, 2}));
  PotentialVector star{{0, 0.3}, {1, -0.2}, {2, 1.4}};
  auto q = cell_averages(be, star, false).q;
  auto got = invert_state(be, q, PotentialVector{{0, 0.0}, {1, 0.0}, {2, 1.0}});
  for (int i : {0, 1, 2}) CHECK(got.get(i) == doctest::Approx(star.get(i)).epsilon(1e-9));
}

TEST_CASE("homogeneous state under homogeneous fields has zero right-hand side") {
  cft::CftBackend be(2);
  Grid g{16, 1.0};
  Solver s(be, FieldProfile::constant({{2, 1.0}, {1, 0.2}}));
  auto st = state_from_potentials(be, g, [](double) { return PotentialVector{{1, 0.1}, {2, 1.2}}; });
  auto r = s.rhs(st);
  CHECK(r.dq.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.source.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant fields conserve totals and carry no source") {
  cft::CftBackend be(2);
  Grid g{32, 1.0};
  Solver s(be, FieldProfile::constant({{2, 1.0}}));
  auto st = state_from_potentials(be, g, [](double x) {
    return PotentialVector{{1, 0.05 * std::sin(2 * kPi * x)}, {2, 1.0 + 0.1 * std::cos(2 * kPi * x)}};
  });
  auto traj = evolve(s, st, {.dt = 0.0, .t_end = 0.2});
  CHECK(traj.integrated_source.cwiseAbs().maxCoeff() == 0.0);
  CHECK((traj.totals.back() - traj.totals.front()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stationary thermal profile: right-hand side is second order in dx") {
  cft::CftBackend be(2);
  auto fields = bump_energy_field();
  std::vector<double> h, err;
  for (int cells : {32, 64, 128}) {
    Grid g{cells, 1.0};
    Solver s(be, fields);
    auto st = stationary_state(be, g, fields, 1.0);
    CHECK(thermal_family_residual(st, fields) <= 1e-12);
    h.push_back(g.dx());
    err.push_back(s.rhs(st).dq.cwiseAbs().maxCoeff());
  }
  for (double o : observed_orders(h, err)) CHECK(o == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("chemical-potential variant of the thermal family with charge 0") {
  tba::TbaBackend be(tba::hard_rods(1.0, {0, 1, 2}));
  FieldProfile fields;
  fields.terms[2] = {parse_primitive("constant 1"), parse_primitive("cosine 0.2 1")};
  fields.terms[0] = {parse_primitive("cosine 0.3 1 0.5")};
  Grid g{16, 1.0};
  auto st = stationary_state(be, g, fields, 1.5, 0.4);
  for (int m = 0; m < g.cells; ++m) {
    const double x = g.x(m);
    CHECK(st.beta(m, 0) == doctest::Approx(1.5 * (fields.value(0, x, 1.0) - 0.4)));
    CHECK(st.beta(m, 2) == doctest::Approx(1.5 * fields.value(2, x, 1.0)));
  }
  CHECK(thermal_family_residual(st, fields) <= 1e-12);
}

TEST_CASE("varying fields: non-conservation equals the integrated source") {
  cft::CftBackend be(2);
  auto fields = bump_energy_field();
  Grid g{64, 1.0};
  Solver s(be, fields);
  auto st = state_from_potentials(be, g, [](double x) {
    return PotentialVector{{1, 0.1 * std::sin(2 * kPi * x)}, {2, 1.0}};
  });
  auto traj = evolve(s, st, {.dt = 0.0, .t_end = 0.3});
  CHECK(traj.integrated_source.cwiseAbs().maxCoeff() > 1e-4);
  CHECK(charge_budget_residual(traj) <= 1e-12);
}

TEST_CASE("CFL guard") {
  cft::CftBackend be(2);
  Grid g{32, 1.0};
  Solver s(be, FieldProfile::constant({{2, 1.0}}));
  auto st = state_from_potentials(be, g, [](double) { return PotentialVector{{1, 0.0}, {2, 1.0}}; });
  CHECK(code_of([&] { evolve(s, st, {.dt = 0.1, .t_end = 0.2}); }) == ErrorCode::CFLViolation);
  auto traj = evolve(s, st, {.dt = 0.0, .t_end = 0.1});
  CHECK(traj.dt <= 0.5 * g.dx() / traj.v_max * (1 + 1e-12));
  CHECK(traj.steps * traj.dt == doctest::Approx(0.1));
}

TEST_CASE("zero-amplitude run stays put and conserves entropy") {
  cft::CftBackend be(2);
  Grid g{16, 1.0};
  Solver s(be, FieldProfile::constant({{2, 1.0}}));
  auto st = state_from_potentials(be, g, [](double) { return PotentialVector{{1, 0.2}, {2, 1.1}}; });
  auto traj = evolve(s, st, {.dt = 0.0, .t_end = 0.5});
  CHECK(max_drift(traj) <= 1e-13);
  CHECK(entropy_budget(traj).max_rate <= 1e-12);
}

TEST_CASE("entropy: converges for EKMS, order-one production without it") {
  auto fields = bump_energy_field();
  auto init = [](double x) {
    return PotentialVector{{1, 0.05 * std::sin(2 * kPi * x)}, {2, 1.0 + 0.05 * std::cos(2 * kPi * x)}};
  };
  auto run = [&](const ThermoBackend& be, int cells) {
    Grid g{cells, 1.0};
    Solver s(be, fields);
    return entropy_budget(evolve(s, state_from_potentials(be, g, init), {.dt = 0.0, .t_end = 0.25})).max_change;
  };
  cft::CftBackend good(2);
  cft::KmsViolatingCft bad(2, 0.3);
  const double g32 = run(good, 32), g64 = run(good, 64);
  CHECK(std::log2(g32 / g64) >= 1.8);
  const double b32 = run(bad, 32), b64 = run(bad, 64);
  CHECK(std::abs(std::log2(b32 / b64)) < 0.2);
  CHECK(b64 > 100 * g64);
}

TEST_CASE("local Lax-Friedrichs adds dissipation only where the state varies") {
  cft::CftBackend be(2);
  Grid g{32, 1.0};
  SolverOptions o;
  o.scheme = FluxScheme::LocalLaxFriedrichs;
  Solver s(be, FieldProfile::constant({{2, 1.0}}), o);
  auto flat = state_from_potentials(be, g, [](double) { return PotentialVector{{1, 0.0}, {2, 1.0}}; });
  s.set_dissipation_speeds(s.local_speeds(flat));
  CHECK(s.rhs(flat).dq.cwiseAbs().maxCoeff() == 0.0);
  CHECK(parse_scheme("llf") == FluxScheme::LocalLaxFriedrichs);
  CHECK(parse_scheme("central") == FluxScheme::Central);
  CHECK(code_of([] { parse_scheme("upwind"); }) == ErrorCode::ConfigError);
}

TEST_CASE("sound speed from the flux Jacobian") {
  cft::CftBackend be(2);
  Grid g{64, 1.0};
  Solver s(be, FieldProfile::constant({{2, 1.0}}));
  PotentialVector rest{{1, 0.0}, {2, 1.0}};
  auto A = flux_jacobian(s, rest, 0.0, 1.0);
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  // conformal fluid at rest in d = 2: c_s = 1/sqrt(2)
  CHECK(es.eigenvalues().real().maxCoeff() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-8));
  auto w = sound_wave_test(s, g, rest, 1e-4, 0.5);
  CHECK(w.relative_error <= 0.01);
  Solver varying(be, bump_energy_field());
  CHECK(code_of([&] { sound_wave_test(varying, g, rest, 1e-4, 0.5); }) == ErrorCode::DomainError);
}

TEST_CASE("few-charge closure") {
  SUBCASE("reproduces the conformal currents with nu = tanh theta") {
    cft::CftBackend be(2);
    for (double theta : {0.0, 0.3, -0.8}) {
      const double br = 1.3, T = 1 / (br * std::cosh(theta)), nu = std::tanh(theta);
      auto fc = few_charge_currents(be, T, nu, 0.0, 0.0);
      cft::CftState st{2, 1.0, br, theta};
      auto av = cft::cft_averages(st);
      CHECK(fc.j2 == doctest::Approx(av.j2).epsilon(1e-8));
      CHECK(fc.T11 == doctest::Approx(av.j1).epsilon(1e-8));
      CHECK_FALSE(fc.j0.has_value());
      CHECK(fc.cross_check <= 1e-8);
    }
  }
  SUBCASE("rest frame and G shift") {
    tba::TbaBackend be(tba::free_classical({0, 1, 2}));
    const double T = 0.8, mu = 0.2;
    auto fc = few_charge_currents(be, T, 0.0, mu, 0.0);
    const double f = be.evaluate(fc.beta, {false, false}).f;
    CHECK(*fc.j0 == 0.0);
    CHECK(fc.T11 == doctest::Approx(-T * f).epsilon(1e-14));
    CHECK(fc.j2 == 0.0);
    auto shifted = few_charge_currents(be, T, 0.0, mu, 0.7);
    CHECK(shifted.j2 - fc.j2 == doctest::Approx(-T * T * 0.7).epsilon(1e-14));
    CHECK(fc.beta.get(0) == doctest::Approx(-mu / T));
    CHECK(fc.beta.get(2) == doctest::Approx(1 / T));
  }
  SUBCASE("moving free gas: number current is nu times density") {
    tba::TbaBackend be(tba::free_classical({0, 1, 2}));
    const double T = 0.5, nu = 0.3;
    auto fc = few_charge_currents(be, T, nu, 0.1, 0.0);
    auto av = *be.evaluate(fc.beta, {.fluxes = false, .averages = true}).averages;
    CHECK(*fc.j0 == doctest::Approx(av.j.at({2, 0})).epsilon(1e-10));
    CHECK(fc.T11 == doctest::Approx(av.j.at({2, 1})).epsilon(1e-10));
    CHECK(fc.j2 == doctest::Approx(av.j.at({2, 2})).epsilon(1e-10));
  }
  SUBCASE("charge set limits") {
    tba::TbaBackend be(tba::lieb_liniger(1.0));
    CHECK(code_of([&] { few_charge_potentials(be, 1.0, 0.0, 0.0); }) == ErrorCode::UnknownChargeIndex);
    CHECK(code_of([&] { few_charge_potentials(cft::CftBackend(2), -1.0, 0.0, 0.0); }) == ErrorCode::DomainError);
  }
}

TEST_CASE("trajectory output") {
  cft::CftBackend be(2);
  Grid g{8, 1.0};
  Solver s(be, bump_energy_field());
  auto traj = evolve(s, stationary_state(be, g, bump_energy_field(), 1.0), {.dt = 0.0, .t_end = 0.1, .record_every = 2});
  REQUIRE(traj.snapshots.size() >= 2);
  auto csv = snapshot_csv(traj, traj.snapshots.front());
  CHECK(csv.rfind("x,q1,q2,beta1,beta2,s,entropy_flux\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  auto m = manifest(traj);
  CHECK(m["cells"] == 8);
  CHECK(m["scheme"] == "central");
  CHECK(m.contains("entropy"));
  CHECK(m.contains("charge_budget_residual"));
}
