#include "ekms/chain/checks.hpp"

#include <cmath>

#include "ekms/error.hpp"

namespace ekms::chain {

CheckReport check_kms(const GGEnsemble& ens, const PauliSum& o1, const PauliSum& o2, double tol) {
  const cplx lhs = ens.average(o1 * o2);
  const cplx rhs = ens.kms_rhs(o1, o2);
  const double residual = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
  return make_check("kms", residual, tol, {lhs.real(), lhs.imag(), rhs.real(), rhs.imag()});
}

TangentProbe::TangentProbe(const ChainOperatorSet& ops, const GGEnsemble& base, double delta)
    : ops_(ops), base_(base), delta_(delta) {}

const std::pair<GGEnsemble, GGEnsemble>& TangentProbe::shifted(ChargeIndex i) const {
  auto it = cache_.find(i);
  if (it != cache_.end()) return it->second;
  const PotentialVector& b = base_.beta();
  return cache_
      .emplace(i, std::make_pair(GGEnsemble(ops_, b.shifted(i, delta_)), GGEnsemble(ops_, b.shifted(i, -delta_))))
      .first->second;
}

double TangentProbe::finite_difference(const PauliSum& o, ChargeIndex i) const {
  const auto& [up, down] = shifted(i);
  return (up.real_average(o) - down.real_average(o)) / (2.0 * delta_);
}

double TangentProbe::connected(const PauliSum& o, ChargeIndex i) const {
  const PauliSum& Q = ops_.Q.at(i);
  return base_.real_average(o * Q) - base_.real_average(o) * base_.real_average(Q);
}

CheckReport TangentProbe::check(const PauliSum& o, ChargeIndex i, double tol) const {
  const double fd = -finite_difference(o, i);
  const double exact = connected(o, i);
  const double residual = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
  return make_check("tangent", residual, tol, {fd, exact});
}

FirstMoment first_moment(const ChainOperatorSet& ops, const GGEnsemble& ens, ChargeIndex i, ChargeIndex j) {
  const int N = ops.N();
  FirstMoment out;
  out.lhs = ens.real_average(ops.current(i, j, 0) + ops.current(j, i, 0));
  PauliSum weighted;
  const PauliSum& qj0 = ops.density(j, 0);
  for (int x = 0; x < N; ++x) {
    PauliSum c = commutator(ops.density(i, x), qj0);
    if (c.empty()) continue;
    const int xs = signed_position(x, N);
    if (std::abs(xs) == N / 2) out.touches_cut = true;
    weighted += c * cplx(0.0, -static_cast<double>(xs));
  }
  out.rhs = ens.real_average(weighted);
  out.residual = std::abs(out.lhs - out.rhs) / std::max(1.0, std::abs(out.lhs));
  return out;
}

CheckReport check_first_moment(const ChainOperatorSet& ops, const GGEnsemble& ens, ChargeIndex i, ChargeIndex j,
                               double tol) {
  if (ops.N() < 10) throw Error(ErrorCode::DomainExceeded, "first-moment check needs at least 10 sites");
  for (const auto& [k, b] : ens.beta().entries())
    if (std::abs(b) > 0.5) throw Error(ErrorCode::DomainExceeded, "first-moment check needs |beta| <= 0.5");
  FirstMoment fm = first_moment(ops, ens, i, j);
  return make_check("first-moment", fm.residual, tol, {fm.lhs, fm.rhs},
                    fm.touches_cut ? "commutator support reaches the antipodal site" : "");
}

CheckReport check_involution(const ChainOperatorSet& ops, double tol) {
  return make_check("involution", involution_residual(ops), tol);
}

CheckReport check_continuity(const ChainOperatorSet& ops, double tol) {
  double worst = 0.0;
  std::vector<double> samples;
  for (const auto& [key, js] : ops.j) {
    double r = continuity_residual(ops, key.first, key.second);
    samples.push_back(r);
    worst = std::max(worst, r);
  }
  return make_check("continuity", worst, tol, samples);
}

CheckReport check_energy_current(const ChainOperatorSet& ops, double tol) {
  const PauliSum& j22 = ops.current(2, 2, 0);
  double r = projection_residual(ops, j22, {4, 2, 0});
  return make_check("energy-current", r, tol, {j22.hs_norm()});
}

PauliSum random_local_observable(int N, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pos(0, N - 1), width(1, 2);
  std::normal_distribution<double> coef(0.0, 1.0);
  const int x = pos(rng), w = width(rng);
  const char axes[4] = {'I', 'X', 'Y', 'Z'};
  PauliSum o;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < (w == 2 ? 4 : 1); ++b) {
      if (a == 0 && b == 0) continue;
      PauliString s = PauliString::site(axes[a], x);
      if (w == 2) {
        PauliString t = PauliString::site(axes[b], (x + 1) % N);
        s = PauliString{s.x | t.x, s.z | t.z};
      }
      o.add(s, coef(rng));
    }
  return o;
}

}  // namespace ekms::chain
