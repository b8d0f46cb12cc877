#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "ekms/chain/pauli.hpp"
#include "ekms/error.hpp"

using namespace ekms::chain;

namespace {

const cplx I1{0, 1};

// site-by-site action on a computational basis state
cplx oracle_phase(const PauliString& p, std::uint64_t b, int n) {
  cplx ph = 1;
  for (int j = 0; j < n; ++j) {
    const bool bx = (p.x >> j) & 1, bz = (p.z >> j) & 1, bit = (b >> j) & 1;
    if (bx && bz) ph *= I1 * (bit ? -1.0 : 1.0);
    else if (bz) ph *= bit ? -1.0 : 1.0;
  }
  return ph;
}

Eigen::MatrixXcd dense(const PauliSum& s, int n) {
  const std::size_t D = std::size_t{1} << n;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(D, D);
  for (const auto& [p, c] : s.terms())
    for (std::uint64_t b = 0; b < D; ++b) M(b ^ p.x, b) += c * oracle_phase(p, b, n);
  return M;
}

PauliString random_string(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> U(0, (std::uint64_t{1} << n) - 1);
  return {U(rng), U(rng)};
}

PauliSum random_sum(int n, int terms, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  PauliSum s;
  for (int t = 0; t < terms; ++t) s.add(random_string(n, rng), cplx(N(rng), N(rng)));
  return s;
}

}  // namespace

TEST_CASE("single-site algebra") {
  auto X = PauliString::site('X', 0), Y = PauliString::site('Y', 0), Z = PauliString::site('Z', 0);
  auto xy = multiply(X, Y);
  CHECK(xy.string == Z);
  CHECK(xy.phase == I1);
  auto yz = multiply(Y, Z);
  CHECK(yz.string == X);
  CHECK(yz.phase == I1);
  auto zx = multiply(Z, X);
  CHECK(zx.string == Y);
  CHECK(zx.phase == I1);
  for (auto P : {X, Y, Z}) {
    auto sq = multiply(P, P);
    CHECK(sq.string.identity());
    CHECK(sq.phase == cplx(1));
  }
  CHECK_FALSE(commute(X, Z));
  CHECK(commute(X, PauliString::site('Z', 1)));
  CHECK_THROWS_AS(PauliString::site('Q', 0), ekms::Error);
  CHECK_THROWS_AS(PauliString::site('X', 64), ekms::Error);
}

TEST_CASE("rendering") {
  PauliString p = multiply(PauliString::site('X', 0), PauliString::site('Z', 3)).string;
  p = multiply(p, PauliString::site('Y', 1)).string;
  CHECK(p.to_string() == "X0 Y1 Z3");
  CHECK(PauliString{}.to_string() == "I");
  CHECK(p.weight() == 3);
}

TEST_CASE("apply_phase matches the site-by-site action") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    auto p = random_string(6, rng);
    for (std::uint64_t b = 0; b < 64; b += 7) CHECK(std::abs(apply_phase(p, b) - oracle_phase(p, b, 6)) < 1e-15);
  }
}

TEST_CASE("products and commutators agree with dense matrices") {
  std::mt19937_64 rng(2);
  const int n = 4;
  for (int t = 0; t < 30; ++t) {
    auto a = random_sum(n, 5, rng), b = random_sum(n, 5, rng);
    CHECK((dense(a * b, n) - dense(a, n) * dense(b, n)).norm() < 1e-12);
    CHECK((dense(commutator(a, b), n) - (dense(a, n) * dense(b, n) - dense(b, n) * dense(a, n))).norm() < 1e-12);
    CHECK((dense(a.adjoint(), n) - dense(a, n).adjoint()).norm() < 1e-12);
    CHECK(std::abs(a.normalized_trace() - dense(a, n).trace() / 16.0) < 1e-12);
    // Hilbert-Schmidt norm with tr(A^dag A) / 2^n
    CHECK(a.hs_norm() == doctest::Approx(std::sqrt((dense(a, n).adjoint() * dense(a, n)).trace().real() / 16.0)));
    auto c = random_sum(n, 3, rng);
    CHECK((dense((a * b) * c, n) - dense(a * (b * c), n)).norm() < 1e-11);
    auto sa = random_string(n, rng), sb = random_string(n, rng);
    auto m1 = dense(PauliSum(sa), n), m2 = dense(PauliSum(sb), n);
    CHECK(commute(sa, sb) == ((m1 * m2 - m2 * m1).norm() < 1e-12));
  }
}

TEST_CASE("sums, pruning and hermiticity") {
  auto X0 = PauliSum(PauliString::site('X', 0));
  auto s = X0 + X0 * cplx(-1.0);
  CHECK(s.pruned().empty());
  PauliSum h = X0 + PauliSum(PauliString::site('Z', 1), 2.0);
  CHECK(h.hermitian());
  CHECK_FALSE((h * I1).hermitian());
  CHECK(h.max_abs() == 2.0);
  CHECK(h.support() == 0b11);
  CHECK(PauliSum::identity(3.0).normalized_trace() == cplx(3.0));
}

TEST_CASE("translation on the ring") {
  const int N = 6;
  CHECK(rotate(0b000001, 1, N) == 0b000010);
  CHECK(rotate(0b100000, 1, N) == 0b000001);
  CHECK(rotate(0b100001, -1, N) == 0b110000);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto a = random_sum(N, 4, rng), b = random_sum(N, 4, rng);
    CHECK((dense(a.translated(N, N), N) - dense(a, N)).norm() < 1e-13);
    CHECK((dense(a.translated(2, N) * b.translated(2, N), N) - dense((a * b).translated(2, N), N)).norm() < 1e-11);
    // T a T^dag with the cyclic permutation matrix
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(64, 64);
    for (std::uint64_t s = 0; s < 64; ++s) T(rotate(s, 1, N), s) = 1;
    CHECK((dense(a.translated(1, N), N) - T * dense(a, N) * T.adjoint()).norm() < 1e-12);
  }
}
