#include <cmath>
#include <random>

#include "doctest.h"
#include "ekms/cft/cft.hpp"
#include "ekms/checks.hpp"
#include "ekms/error.hpp"
#include "ekms/report.hpp"

using namespace ekms;
using namespace ekms::cft;

namespace {

// sinh = 3/4, cosh = 5/4
CftState rational_state(int d) {
  CftState s;
  s.d = d;
  s.beta_rest = 1.0;
  s.theta = std::asinh(0.75);
  return s;
}

}  // namespace

TEST_CASE("hand-checked rationals at sinh theta = 3/4") {
  auto av = cft_averages(rational_state(2));
  CHECK(av.q2 == doctest::Approx(59.0 / 16).epsilon(1e-15));
  CHECK(av.q1 == doctest::Approx(45.0 / 16).epsilon(1e-15));
  CHECK(av.j2 == doctest::Approx(45.0 / 16).epsilon(1e-15));
  CHECK(av.j1 == doctest::Approx(43.0 / 16).epsilon(1e-15));
  auto fl = cft_fluxes(rational_state(2));
  CHECK(fl.g1 == doctest::Approx(-5.0 / 4).epsilon(1e-15));
  CHECK(fl.f == fl.g1);
  CHECK(fl.g2 == doctest::Approx(-3.0 / 4).epsilon(1e-15));
  auto s = rational_state(2);
  CHECK(s.beta1() == doctest::Approx(-0.75));
  CHECK(s.beta2() == doctest::Approx(1.25));
  CHECK(std::abs(s.beta1() * fl.g1 + s.beta2() * fl.g2) < 1e-15);

  // d = 3: q2 = 3*25/16 + 9/16, q1 = 4*15/16, j1 = 25/16 + 27/16
  auto a3 = cft_averages(rational_state(3));
  CHECK(a3.q2 == doctest::Approx(21.0 / 4).epsilon(1e-15));
  CHECK(a3.q1 == doctest::Approx(15.0 / 4).epsilon(1e-15));
  CHECK(a3.j1 == doctest::Approx(13.0 / 4).epsilon(1e-15));
}

TEST_CASE("potentials to state") {
  auto s0 = cft_from_potentials(0.0, 1.0);
  CHECK(s0.beta_rest == 1.0);
  CHECK(s0.theta == 0.0);
  auto s1 = cft_from_potentials(-0.75, 1.25);
  CHECK(s1.beta_rest == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::sinh(s1.theta) == doctest::Approx(0.75).epsilon(1e-14));
  for (auto [b1, b2] : {std::pair{1.0, 1.0}, std::pair{-2.0, 1.0}, std::pair{0.0, 0.0}, std::pair{0.5, -1.0}}) {
    try {
      cft_from_potentials(b1, b2);
      FAIL("expected TimelikeViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TimelikeViolation);
    }
  }
}

TEST_CASE("zero boost and scaling") {
  for (int d : {2, 3, 4}) {
    CftState s;
    s.d = d;
    s.beta_rest = 1.7;
    auto av = cft_averages(s);
    CHECK(av.q1 == 0.0);
    CHECK(av.j2 == 0.0);
    CHECK(av.q2 == doctest::Approx(d * std::pow(1.7, -(d + 1))));
    auto fl = cft_fluxes(s);
    CHECK(fl.g2 == 0.0);
    CHECK(fl.f == doctest::Approx(-std::pow(1.7, -d)));
    // f = -T^11 / T with T = 1 / beta^2
    CHECK(fl.f == doctest::Approx(-s.beta2() * av.j1).epsilon(1e-14));

    CftState t = s;
    t.theta = 0.4;
    CftState u = t;
    u.beta_rest *= 2.5;
    CHECK(cft_fluxes(u).f == doctest::Approx(cft_fluxes(t).f * std::pow(2.5, -d)).epsilon(1e-14));
    CHECK(cft_averages(u).q2 == doctest::Approx(cft_averages(t).q2 * std::pow(2.5, -(d + 1))).epsilon(1e-14));
  }
}

TEST_CASE("averages are the beta-derivatives of the fluxes with a = 1") {
  CHECK(consistent_a() == 1.0);
  for (int d : {2, 3}) {
    CftBackend be(d);
    for (auto [b1, b2] : {std::pair{0.0, 1.0}, std::pair{-0.75, 1.25}, std::pair{0.4, 0.9}}) {
      PotentialVector b{{1, b1}, {2, b2}};
      auto cur = currents_from_flux(be, b);
      CHECK(cur.analytic);
      CHECK(cur.cross_check_residual < 1e-8);
      auto q = densities_from_free_energy(be, b);
      auto av = cft_averages(cft_from_potentials(b1, b2, d));
      CHECK(q.at(1) == doctest::Approx(av.q1).epsilon(1e-8));
      CHECK(q.at(2) == doctest::Approx(av.q2).epsilon(1e-8));
    }
  }
}

TEST_CASE("closed-form covariance and B at zero boost") {
  for (int d : {2, 3}) {
    auto s = cft_from_potentials(0.3, 1.1, d);
    auto C = cft_covariance(s);
    const double h = 1e-5;
    auto dq = [&](double d1, double d2) { return cft_averages(cft_from_potentials(0.3 + d1, 1.1 + d2, d)); };
    CHECK(C(0, 0) == doctest::Approx(-(dq(h, 0).q1 - dq(-h, 0).q1) / (2 * h)).epsilon(1e-8));
    CHECK(C(0, 1) == doctest::Approx(-(dq(0, h).q1 - dq(0, -h).q1) / (2 * h)).epsilon(1e-8));
    CHECK(C(1, 1) == doctest::Approx(-(dq(0, h).q2 - dq(0, -h).q2) / (2 * h)).epsilon(1e-8));
    CHECK(C(1, 0) == C(0, 1));
  }
  // at theta = 0, <j_1> = b^{-(d+1)} (cosh^2 + d sinh^2) gives B_112 = (d+1) b2^{-(d+2)}
  CftBackend be(2);
  auto B = b_matrix(be, PotentialVector{{1, 0.0}, {2, 1.3}});
  CHECK(B.at(2)(0, 1) == doctest::Approx(3 * std::pow(1.3, -4)).epsilon(1e-8));
  CHECK(B.at(2)(1, 0) == doctest::Approx(B.at(2)(0, 1)).epsilon(1e-8));
}

TEST_CASE("EKMS and identities on random boosted states") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> br(0.5, 2.0), th(-1.0, 1.0);
  for (int d : {2, 3}) {
    CftBackend be(d);
    std::vector<PotentialVector> samples;
    for (int s = 0; s < 20; ++s) {
      CftState st;
      st.d = d;
      st.beta_rest = br(rng);
      st.theta = th(rng);
      auto fl = cft_fluxes(st);
      CHECK(std::abs(st.beta1() * fl.g1 + st.beta2() * fl.g2) <= 1e-12);
      auto av = cft_averages(st);
      CHECK(av.q1 == av.j2);
      samples.push_back(PotentialVector{{1, st.beta1()}, {2, st.beta2()}});
    }
    CHECK(check_ekms(be, samples, 1e-12).pass);
    for (int s = 0; s < 5; ++s) {
      auto r = assemble_report(be, samples[s]);
      CHECK(check_b_symmetry(r, 1e-10).pass);
      CHECK(check_g1_equals_f(r, 1, 1e-12).pass);
      CHECK(check_convexity(r, 1e-12).pass);
      for (const auto& c : check_identities(be, samples[s], 1e-10)) {
        INFO(c.identity << " " << c.residual);
        CHECK(c.pass);
      }
    }
  }
}

TEST_CASE("inversion from densities") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> br(0.5, 2.0), th(-1.5, 1.5);
  for (int d : {2, 3, 5}) {
    for (int s = 0; s < 10; ++s) {
      CftState st;
      st.d = d;
      st.beta_rest = br(rng);
      st.theta = th(rng);
      auto av = cft_averages(st);
      auto back = cft_from_densities(av.q1, av.q2, d);
      CHECK(back.beta_rest == doctest::Approx(st.beta_rest).epsilon(1e-12));
      CHECK(back.theta == doctest::Approx(st.theta).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(cft_from_densities(0.0, -1.0), Error);
  CHECK_THROWS_AS(cft_from_densities(5.0, 1.0), Error);
}

TEST_CASE("the EKMS-violating fixture fails the contraction check") {
  KmsViolatingCft bad(2, 0.3);
  std::vector<PotentialVector> samples{{{1, 0.1}, {2, 1.0}}, {{1, -0.2}, {2, 0.7}}, {{1, 0.5}, {2, 1.9}}};
  auto r = check_ekms(bad, samples, 1e-6);
  CHECK_FALSE(r.pass);
  // currents stay the flux derivatives, so the failure is in G alone
  auto cur = currents_from_flux(bad, samples[0]);
  CHECK(cur.cross_check_residual < 1e-8);
  CHECK(check_ekms(CftBackend(2), samples, 1e-12).pass);
  CHECK_THROWS_AS(CftBackend(1), Error);
}
