#include "ekms/chain/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Dense>

#include "ekms/error.hpp"

namespace ekms::chain {

namespace {

constexpr int kLineOrigin = 32;

PauliString shifted_left(const PauliString& s, int by) { return {s.x << by, s.z << by}; }

PauliSum shift_sum(const PauliSum& o, int by) {
  PauliSum out;
  for (const auto& [s, c] : o.terms()) out.add(shifted_left(s, by), c);
  return out;
}

// Folds line positions (origin at kLineOrigin) onto an N-site ring.
std::uint64_t fold(std::uint64_t bits, int N) {
  std::uint64_t out = 0;
  while (bits) {
    int b = std::countr_zero(bits);
    bits &= bits - 1;
    int r = ((b - kLineOrigin) % N + N) % N;
    out |= std::uint64_t{1} << r;
  }
  return out;
}

PauliSum fold_sum(const PauliSum& o, int N) {
  PauliSum out;
  for (const auto& [s, c] : o.terms()) {
    PauliString folded{fold(s.x, N), fold(s.z, N)};
    if (std::popcount(folded.x | folded.z) != s.weight())
      throw Error(ErrorCode::DimensionMismatch, "current support does not fit on the ring");
    out.add(folded, c);
  }
  return out;
}

}  // namespace

PauliSum heisenberg_density(ChargeIndex label) {
  using P = PauliString;
  PauliSum out;
  switch (label) {
    case 0:
      out.add(P::site('Z', 0), 1.0);
      return out;
    case 2:
      for (char a : {'X', 'Y', 'Z'}) {
        PauliProduct p = multiply(P::site(a, 0), P::site(a, 1));
        out.add(p.string, p.phase);
      }
      return out;
    case 4: {
      const char axes[3] = {'X', 'Y', 'Z'};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) {
            if (a == b || b == c || a == c) continue;
            // Levi-Civita sign of (a, b, c)
            double sign = ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;
            PauliProduct ab = multiply(P::site(axes[a], 0), P::site(axes[b], 1));
            PauliProduct abc = multiply(ab.string, P::site(axes[c], 2));
            out.add(abc.string, sign * ab.phase * abc.phase);
          }
      return out;
    }
  }
  throw Error(ErrorCode::UnknownChargeIndex, "no Heisenberg density for label " + std::to_string(label));
}

ChainSpec ChainSpec::heisenberg(int N) {
  ChainSpec s;
  s.N = N;
  s.densities = {{0, heisenberg_density(0), 1}, {2, heisenberg_density(2), 2}, {4, heisenberg_density(4), 3}};
  return s;
}

void ChainSpec::validate() const {
  if (N > 14) throw Error(ErrorCode::MemoryBudget, "dense chain limited to 14 sites, got " + std::to_string(N));
  if (N < 6 || N % 2 != 0) throw Error(ErrorCode::DomainError, "site count must be even and at least 6");
  if (densities.empty()) throw Error(ErrorCode::DomainError, "chain needs at least one density");
  for (const auto& d : densities) {
    if (d.width < 1 || 2 * d.width >= N)
      throw Error(ErrorCode::DomainError, "density width must be below N/2 for label " + std::to_string(d.label));
    if ((d.local.support() >> d.width) != 0)
      throw Error(ErrorCode::DomainError, "density pattern exceeds its declared width");
    if (!d.local.hermitian()) throw Error(ErrorCode::DomainError, "density pattern is not Hermitian");
    if (std::abs(d.local.normalized_trace()) > 1e-14) throw Error(ErrorCode::DomainError, "density pattern is not traceless");
  }
}

std::vector<ChargeIndex> ChainOperatorSet::labels() const {
  std::vector<ChargeIndex> out;
  for (const auto& [i, v] : q) out.push_back(i);
  return out;
}

const PauliSum& ChainOperatorSet::density(ChargeIndex i, int x) const {
  auto it = q.find(i);
  if (it == q.end()) throw Error(ErrorCode::UnknownChargeIndex, "no density " + std::to_string(i));
  return it->second.at(((x % N()) + N()) % N());
}

const PauliSum& ChainOperatorSet::current(ChargeIndex k, ChargeIndex i, int x) const {
  auto it = j.find({k, i});
  if (it == j.end()) throw Error(ErrorCode::UnknownChargeIndex, "no current (" + std::to_string(k) + "," + std::to_string(i) + ")");
  return it->second.at(((x % N()) + N()) % N());
}

ChainOperatorSet build_chain(const ChainSpec& spec, bool with_currents) {
  spec.validate();
  ChainOperatorSet ops;
  ops.spec = spec;
  const int N = spec.N;
  for (const auto& d : spec.densities) {
    auto& row = ops.q[d.label];
    PauliSum total;
    for (int x = 0; x < N; ++x) {
      row.push_back(d.local.translated(x, N));
      total += row.back();
    }
    ops.Q[d.label] = total;
  }
  ops.involution = involution_residual(ops);
  if (ops.involution > 1e-10)
    throw Error(ErrorCode::InvolutionFailure, "charges do not commute, residual " + std::to_string(ops.involution));
  if (with_currents)
    for (ChargeIndex k : ops.labels())
      for (ChargeIndex i : ops.labels()) ops.j[{k, i}] = derive_current(ops, k, i);
  return ops;
}

double involution_residual(const ChainOperatorSet& ops) {
  double worst = 0.0;
  for (const auto& [i, Qi] : ops.Q)
    for (const auto& [j, Qj] : ops.Q)
      if (i < j) worst = std::max(worst, commutator(Qi, Qj).max_abs());
  return worst;
}

std::vector<PauliSum> derive_current(const ChainOperatorSet& ops, ChargeIndex k, ChargeIndex i) {
  const int N = ops.N();
  const DensityPattern* dk = nullptr;
  const DensityPattern* di = nullptr;
  for (const auto& d : ops.spec.densities) {
    if (d.label == k) dk = &d;
    if (d.label == i) di = &d;
  }
  if (!dk || !di) throw Error(ErrorCode::UnknownChargeIndex, "unknown density label");

  // Ring consistency: the commutators must sum to i[Q_k, Q_i] = 0.
  {
    PauliSum total = commutator(ops.Q.at(k), ops.Q.at(i));
    if (total.max_abs() > 1e-10)
      throw Error(ErrorCode::RingInconsistency, "i[Q_k, Q_i] does not vanish on the ring");
  }

  // -i[Q_k, q_i(0)] on the infinite line, keeping only overlapping densities.
  PauliSum qi0 = shift_sum(di->local, kLineOrigin);
  PauliSum Qk_local;
  for (int y = -(dk->width - 1); y <= di->width - 1; ++y) Qk_local += shift_sum(dk->local, kLineOrigin + y);
  PauliSum source = commutator(Qk_local, qi0) * cplx(0.0, -1.0);

  // Group by shape; j(0) - j(-1) = source means a_{s,p} - a_{s,p+1} = c_{s,p}.
  std::map<PauliString, std::map<int, cplx>> by_shape;
  for (const auto& [s, c] : source.terms()) {
    if (s.identity()) throw Error(ErrorCode::RingInconsistency, "commutator has an identity component");
    int p = std::countr_zero(s.support());
    by_shape[PauliString{s.x >> p, s.z >> p}][p] += c;
  }
  PauliSum line_current;
  double scale = std::max(1.0, source.max_abs());
  for (const auto& [shape, coeffs] : by_shape) {
    cplx total{};
    for (const auto& [p, c] : coeffs) total += c;
    if (std::abs(total) > 1e-12 * scale)
      throw Error(ErrorCode::RingInconsistency, "commutator shape " + shape.to_string() + " does not telescope");
    cplx running{};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
      running += it->second;
      line_current.add(shifted_left(shape, it->first), running);
      // positions between listed ones carry the same partial sum
      auto next = std::next(it);
      if (next != coeffs.rend())
        for (int p = it->first - 1; p > next->first; --p) line_current.add(shifted_left(shape, p), running);
    }
  }
  line_current = line_current.pruned(1e-15 * scale);

  PauliSum j0 = fold_sum(line_current, N);
  j0 -= PauliSum::identity(j0.normalized_trace());
  std::vector<PauliSum> out;
  out.reserve(N);
  for (int x = 0; x < N; ++x) out.push_back(j0.translated(x, N));
  return out;
}

double continuity_residual(const ChainOperatorSet& ops, ChargeIndex k, ChargeIndex i) {
  const int N = ops.N();
  double worst = 0.0;
  for (int x = 0; x < N; ++x) {
    PauliSum r = commutator(ops.Q.at(k), ops.density(i, x)) * cplx(0.0, 1.0);
    r += ops.current(k, i, x);
    r -= ops.current(k, i, x - 1);
    worst = std::max(worst, r.max_abs());
  }
  return worst;
}

double projection_residual(const ChainOperatorSet& ops, const PauliSum& o, const std::vector<ChargeIndex>& labels) {
  std::vector<PauliSum> basis{PauliSum::identity()};
  for (ChargeIndex l : labels)
    for (int x = 0; x < ops.N(); ++x) basis.push_back(ops.density(l, x));

  std::map<PauliString, int> row;
  auto index = [&](const PauliString& s) {
    auto [it, inserted] = row.try_emplace(s, static_cast<int>(row.size()));
    return it->second;
  };
  for (const auto& b : basis)
    for (const auto& [s, c] : b.terms()) index(s);
  for (const auto& [s, c] : o.terms()) index(s);

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(row.size(), basis.size());
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(row.size());
  for (std::size_t col = 0; col < basis.size(); ++col)
    for (const auto& [s, c] : basis[col].terms()) A(row.at(s), col) = c;
  for (const auto& [s, c] : o.terms()) y(row.at(s)) = c;

  Eigen::VectorXcd coef = A.completeOrthogonalDecomposition().solve(y);
  double norm = y.norm();
  return norm > 0.0 ? (A * coef - y).norm() / norm : 0.0;
}

int signed_position(int x, int N) {
  int r = ((x % N) + N) % N;
  return r > N / 2 ? r - N : r;
}

}  // namespace ekms::chain
