#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "ekms/chain/backend.hpp"
#include "ekms/chain/checks.hpp"
#include "ekms/checks.hpp"
#include "ekms/error.hpp"
#include "ekms/report.hpp"

using namespace ekms;
using namespace ekms::chain;

namespace {

const cplx I1{0, 1};

cplx site_phase(const PauliString& p, std::uint64_t b, int n) {
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
    for (std::uint64_t b = 0; b < D; ++b) M(b ^ p.x, b) += c * site_phase(p, b, n);
  return M;
}

// Full-space Gibbs state, no symmetry blocks
struct DenseGibbs {
  Eigen::MatrixXcd rho, eW, emW;
  double logZ = 0;
  DenseGibbs(const ChainOperatorSet& ops, const PotentialVector& b) {
    const int n = ops.N();
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(1 << n, 1 << n);
    for (auto [i, v] : b.entries()) W += v * dense(ops.Q.at(i), n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(W);
    const double w0 = es.eigenvalues().minCoeff();
    Eigen::VectorXd e = (-(es.eigenvalues().array() - w0)).exp();
    logZ = std::log(e.sum()) - w0;
    rho = es.eigenvectors() * (e / e.sum()).asDiagonal() * es.eigenvectors().adjoint();
    eW = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() * es.eigenvectors().adjoint();
    emW = es.eigenvectors() * (-es.eigenvalues().array()).exp().matrix().asDiagonal() * es.eigenvectors().adjoint();
  }
  cplx avg(const Eigen::MatrixXcd& o) const { return (rho * o).trace(); }
};

const ChainOperatorSet& heis(int N) {
  static std::map<int, ChainOperatorSet> cache;
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, build_chain(ChainSpec::heisenberg(N))).first;
  return it->second;
}

}  // namespace

TEST_CASE("Heisenberg charges are in involution and translation covariant") {
  const auto& ops = heis(8);
  CHECK(ops.involution <= 1e-12);
  CHECK(check_involution(ops).pass);
  for (int i : {0, 2, 4})
    for (int x = 0; x < 8; ++x) {
      CHECK(std::abs(ops.density(i, x).normalized_trace()) == 0.0);
      CHECK(ops.density(i, x).terms() == ops.density(i, 0).translated(x, 8).terms());
    }
  CHECK(commutator(ops.Q.at(2), ops.Q.at(4)).pruned(1e-12).empty());
}

TEST_CASE("chain construction errors") {
  CHECK_THROWS_AS(build_chain(ChainSpec::heisenberg(16)), Error);
  CHECK_THROWS_AS(build_chain(ChainSpec::heisenberg(7)), Error);
  ChainSpec bad;
  bad.N = 6;
  bad.densities.push_back({0, PauliSum(PauliString::site('X', 0)), 1});
  bad.densities.push_back({2, heisenberg_density(0) * heisenberg_density(0).translated(1, 6), 2});
  try {
    build_chain(bad);
    FAIL("expected InvolutionFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvolutionFailure);
  }
}

TEST_CASE("derived currents: continuity, gauge and ultra-locality") {
  const auto& ops = heis(8);
  CHECK(check_continuity(ops).pass);
  for (int k : {0, 2, 4})
    for (int i : {0, 2, 4}) {
      CHECK(continuity_residual(ops, k, i) <= 1e-12);
      for (int x = 0; x < 8; ++x) CHECK(std::abs(ops.current(k, i, x).normalized_trace()) <= 1e-14);
    }
  for (int x = 0; x < 8; ++x) CHECK(ops.current(0, 0, x).pruned(1e-14).empty());
  auto r = check_energy_current(ops);
  CHECK(r.pass);
  CHECK(r.residual <= 1e-10);
  // j_22 does not lie in span{q_2, q_0, 1} alone
  CHECK(projection_residual(ops, ops.current(2, 2, 0), {0, 2}) > 1e-3);
}

TEST_CASE("symmetry-blocked ensemble agrees with a dense Gibbs state") {
  ChainSpec six;
  six.N = 6;
  six.densities = {{0, heisenberg_density(0), 1}, {2, heisenberg_density(2), 2}};
  const auto small = build_chain(six);
  for (int N : {6, 8}) {
    const auto& ops = N == 6 ? small : heis(N);
    PotentialVector b{{0, 0.15}, {2, 0.4}};
    if (N == 8) b.set(4, -0.1);
    GGEnsemble ens(ops, b);
    DenseGibbs ref(ops, b);
    CHECK(ens.log_partition() == doctest::Approx(ref.logZ).epsilon(1e-12));
    CHECK(std::abs(ens.trace() - 1.0) <= 1e-13);
    CHECK(ens.hermiticity_residual() <= 1e-13);
    for (int i : ops.labels()) CHECK(ens.commutator_residual(ops.Q.at(i)) <= 1e-11);
    std::mt19937_64 rng(N);
    for (int t = 0; t < 10; ++t) {
      auto o1 = random_local_observable(N, rng), o2 = random_local_observable(N, rng);
      CHECK(std::abs(ens.average(o1) - ref.avg(dense(o1, N))) <= 1e-12);
      const cplx kms_ref = (ref.rho * ref.eW * dense(o2, N) * ref.emW * dense(o1, N)).trace();
      CHECK(std::abs(ens.kms_rhs(o1, o2) - kms_ref) <= 1e-11);
    }
    for (int x = 0; x < N; ++x) CHECK(std::abs(ens.average(ops.current(2, 2, x)) - ref.avg(dense(ops.current(2, 2, x), N))) <= 1e-12);
  }
}

TEST_CASE("thermal averages against the spectrum of Q2 alone") {
  const auto& ops = heis(8);
  GGEnsemble ens(ops, PotentialVector{{0, 0.0}, {2, 0.3}, {4, 0.0}});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense(ops.Q.at(2), 8));
  const Eigen::ArrayXd e = es.eigenvalues().array();
  const Eigen::ArrayXd w = (-0.3 * (e - e.minCoeff())).exp();
  const double E = (w * e).sum() / w.sum();
  CHECK(ens.real_average(ops.density(2, 0)) == doctest::Approx(E / 8).epsilon(1e-12));
  CHECK(std::abs(ens.real_average(ops.current(2, 2, 0))) <= 1e-12);

  GGEnsemble zero(ops, PotentialVector::zeros({0, 2, 4}));
  for (int i : {0, 2, 4}) CHECK(std::abs(zero.real_average(ops.density(i, 3))) <= 1e-14);
  CHECK_THROWS_AS(ens.average(PauliSum(PauliString::site('X', 9))), Error);
}

TEST_CASE("KMS relation") {
  const auto& ops = heis(8);
  GGEnsemble ens(ops, PotentialVector{{0, 0.0}, {2, 0.5}, {4, 0.0}});
  CHECK(check_kms(ens, ops.density(2, 0), ops.density(2, 1)).residual <= 1e-10);
  auto id = check_kms(ens, PauliSum::identity(), PauliSum::identity());
  CHECK(id.pass);
  CHECK(id.samples[0] == doctest::Approx(1.0));
  std::mt19937_64 rng(3);
  GGEnsemble mixed(ops, PotentialVector{{0, 0.2}, {2, 0.35}, {4, 0.25}});
  for (int t = 0; t < 20; ++t) {
    auto o1 = random_local_observable(8, rng), o2 = random_local_observable(8, rng);
    CHECK(o1.hermitian());
    CHECK(check_kms(mixed, o1, o2, 1e-10).pass);
  }
}

TEST_CASE("tangent relation") {
  const auto& ops = heis(8);
  GGEnsemble ens(ops, PotentialVector{{0, 0.0}, {2, 0.4}, {4, 0.0}});
  TangentProbe probe(ops, ens);
  CHECK(probe.check(ops.density(2, 0), 2).residual <= 1e-8);
  CHECK(std::abs(probe.connected(PauliSum::identity(), 2)) <= 1e-12);
  CHECK(std::abs(probe.finite_difference(PauliSum::identity(), 2)) <= 1e-10);
  // spin flip symmetry at beta^0 = 0
  CHECK(std::abs(probe.connected(ops.density(2, 0), 0)) <= 1e-10);
  CHECK(std::abs(probe.finite_difference(ops.density(2, 0), 0)) <= 1e-10);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    auto o = random_local_observable(8, rng);
    for (int i : {0, 2, 4}) CHECK(probe.check(o, i).pass);
  }
}

TEST_CASE("first-moment relation") {
  CHECK_THROWS_AS(check_first_moment(heis(8), GGEnsemble(heis(8), PotentialVector{{2, 0.2}}), 2, 2), Error);
  const auto& ops = heis(10);
  GGEnsemble ens(ops, PotentialVector{{0, 0.0}, {2, 0.2}, {4, 0.0}});
  CHECK_THROWS_AS(check_first_moment(ops, GGEnsemble(ops, PotentialVector{{2, 0.7}}), 2, 2), Error);
  CHECK(check_first_moment(ops, ens, 2, 2).pass);
  auto z = first_moment(ops, ens, 0, 0);
  CHECK(std::abs(z.lhs) <= 1e-14);
  CHECK(std::abs(z.rhs) <= 1e-14);
  auto m = first_moment(ops, ens, 2, 0);
  CHECK(std::abs(m.lhs - m.rhs) <= 1e-3);
}

TEST_CASE("ED backend thermodynamics") {
  SUBCASE("trace state has no currents") {
    EdBackend be(ChainSpec::heisenberg(8));
    auto tp = be.evaluate(PotentialVector::zeros({0, 2, 4}), {.fluxes = false, .averages = true});
    for (auto [key, v] : tp.averages->j) CHECK(std::abs(v) <= 1e-14);
    CHECK(tp.f == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("covariance is positive and matches differenced densities") {
    EdBackend be(ChainSpec::heisenberg(8));
    PotentialVector b{{0, 0.0}, {2, 0.3}, {4, 0.0}};
    auto C = *be.covariance(b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK((C - C.transpose()).norm() <= 1e-12);
    auto q = [&](double d) { return be.evaluate(b.shifted(2, d), {.fluxes = false, .averages = true}).averages->q.at(2); };
    CHECK(C(1, 1) == doctest::Approx(-(q(1e-5) - q(-1e-5)) / 2e-5).epsilon(1e-6));
  }
  SUBCASE("index swap relation shrinks with N") {
    PotentialVector b{{0, 0.1}, {2, 0.3}, {4, 0.0}};
    std::vector<double> res;
    for (int N : {8, 10}) {
      EdBackend be(ChainSpec::heisenberg(N));
      auto r = assemble_report(be, b);
      for (const auto& c : check_identities(r, ThermoReport{}, be.traits(), 1e-3))
        if (c.identity == "identity-b") res.push_back(c.residual);
    }
    REQUIRE(res.size() == 2);
    CHECK(res[1] < res[0]);
    CHECK(res[1] <= 1e-3);
  }
  SUBCASE("integrated fluxes approach a potential for the currents as N grows") {
    PotentialVector b{{0, 0.1}, {2, 0.25}, {4, 0.05}};
    const double r8 = currents_from_flux(EdBackend(ChainSpec::heisenberg(8), true), b).cross_check_residual;
    const double r10 = currents_from_flux(EdBackend(ChainSpec::heisenberg(10), true), b).cross_check_residual;
    CHECK(r10 < r8 / 10);
    CHECK(r10 <= 1e-3);
  }
}
