#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "doctest.h"
#include "ekms/error.hpp"
#include "ekms/tba/quadrature.hpp"

using ekms::tba::gauss_legendre;

namespace {

template <class F>
double integrate(const ekms::tba::QuadratureGrid& g, F f) {
  double s = 0;
  for (std::size_t m = 0; m < g.size(); ++m) s += g.weights[m] * f(g.nodes[m]);
  return s;
}

}  // namespace

TEST_CASE("weights sum to the interval length and nodes are symmetric") {
  for (std::size_t M : {2u, 3u, 16u, 101u, 400u}) {
    for (double L : {1.0, 7.5, 20.0}) {
      auto g = gauss_legendre(M, L);
      REQUIRE(g.valid());
      double sum = 0;
      for (double w : g.weights) sum += w;
      CHECK(sum == doctest::Approx(2 * L).epsilon(1e-14));
      for (std::size_t m = 0; m < M; ++m) {
        CHECK(g.nodes[m] == -g.nodes[M - 1 - m]);
        CHECK(g.weights[m] == g.weights[M - 1 - m]);
        CHECK(g.weights[m] > 0);
        if (m) CHECK(g.nodes[m] > g.nodes[m - 1]);
      }
    }
  }
}

TEST_CASE("rule is exact for polynomials up to degree 2M-1") {
  const double L = 1.7;
  for (std::size_t M : {3u, 8u, 15u}) {
    auto g = gauss_legendre(M, L);
    for (std::size_t k = 0; k <= 2 * M - 1; ++k) {
      const double scale = 2 * std::pow(L, k + 1) / (k + 1);
      const double exact = (k % 2) ? 0.0 : scale;
      const double got = integrate(g, [&](double x) { return std::pow(x, static_cast<double>(k)); });
      CHECK(std::abs(got - exact) <= 1e-13 * std::max(1.0, scale));
    }
    // degree 2M is no longer exact
    const double exact = 2 * std::pow(L, 2 * M + 1) / (2 * M + 1);
    const double got = integrate(g, [&](double x) { return std::pow(x, 2.0 * M); });
    CHECK(std::abs(got - exact) > 1e-10 * exact);
  }
}

TEST_CASE("agrees with the boost Gauss-Legendre rule") {
  auto f = [](double x) { return std::exp(-x * x / 3) * std::cos(2 * x) + 1 / (1 + x * x); };
  auto g20 = gauss_legendre(20, 4.0);
  CHECK(integrate(g20, f) == doctest::Approx(boost::math::quadrature::gauss<double, 20>::integrate(f, -4.0, 4.0)).epsilon(1e-14));
  auto g30 = gauss_legendre(30, 2.5);
  CHECK(integrate(g30, f) == doctest::Approx(boost::math::quadrature::gauss<double, 30>::integrate(f, -2.5, 2.5)).epsilon(1e-14));
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(gauss_legendre(1, 1.0), ekms::Error);
  CHECK_THROWS_AS(gauss_legendre(10, 0.0), ekms::Error);
  CHECK_THROWS_AS(gauss_legendre(10, -2.0), ekms::Error);
  ekms::tba::QuadratureGrid empty;
  CHECK_FALSE(empty.valid());
}
