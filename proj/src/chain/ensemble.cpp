#include "ekms/chain/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>

#include "ekms/error.hpp"

namespace ekms::chain {

namespace {

cplx phase_factor(int k, int l, int N) {
  const double a = 2.0 * std::numbers::pi * k * l / N;
  return {std::cos(a), std::sin(a)};
}

PauliSum magnetisation(int N) {
  PauliSum m;
  for (int x = 0; x < N; ++x) m.add(PauliString::site('Z', x), 1.0);
  return m;
}

void require_on_ring(const PauliSum& o, int N) {
  if ((o.support() >> N) != 0) throw Error(ErrorCode::DimensionMismatch, "operator acts beyond the ring");
}

}  // namespace

std::shared_ptr<const SymmetryBasis> SymmetryBasis::get(int N, bool magnetisation_blocks) {
  static std::mutex mutex;
  static std::map<std::pair<int, bool>, std::shared_ptr<const SymmetryBasis>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(N, magnetisation_blocks);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto b = std::make_shared<SymmetryBasis>();
  b->N = N;
  b->magnetisation_blocks = magnetisation_blocks;
  const std::uint64_t dim = std::uint64_t{1} << N;
  b->sectors.resize(magnetisation_blocks ? N + 1 : 1);
  b->sector_of.assign(dim, 0);
  b->index_of.assign(dim, 0);
  b->rep_of.assign(dim, -1);
  b->shift_of.assign(dim, 0);
  for (std::uint64_t s = 0; s < dim; ++s) {
    int sec = magnetisation_blocks ? std::popcount(s) : 0;
    b->sector_of[s] = sec;
    b->index_of[s] = static_cast<int>(b->sectors[sec].states.size());
    b->sectors[sec].states.push_back(s);
  }
  for (auto& sec : b->sectors) {
    for (std::uint64_t s : sec.states) {
      if (b->rep_of[s] >= 0) continue;
      // s is the smallest member of its orbit since states are visited in increasing order
      int rep_index = static_cast<int>(sec.reps.size());
      sec.reps.push_back(s);
      int period = 0;
      std::uint64_t r = s;
      do {
        b->rep_of[r] = rep_index;
        b->shift_of[r] = period;
        ++period;
        r = rotate(r, 1, N);
      } while (r != s);
      sec.period.push_back(period);
    }
  }
  cache[key] = b;
  return b;
}

bool conserves_magnetisation(const ChainOperatorSet& ops) {
  PauliSum m = magnetisation(ops.N());
  for (const auto& [i, Q] : ops.Q)
    if (commutator(Q, m).max_abs() > 1e-12) return false;
  return true;
}

GGEnsemble::GGEnsemble(const ChainOperatorSet& ops, const PotentialVector& beta, std::size_t memory_budget_bytes)
    : beta_(beta) {
  const int N = ops.N();
  for (const auto& [i, b] : beta.entries())
    if (!ops.Q.count(i)) throw Error(ErrorCode::UnknownChargeIndex, "chain has no charge " + std::to_string(i));
  if (!beta.finite()) throw Error(ErrorCode::NonFinite, "non-finite potentials");

  basis_ = SymmetryBasis::get(N, conserves_magnetisation(ops));
  std::size_t bytes = 0;
  for (const auto& sec : basis_->sectors) bytes += sec.states.size() * sec.states.size() * sizeof(cplx);
  if (bytes > memory_budget_bytes)
    throw Error(ErrorCode::MemoryBudget, "density matrix needs " + std::to_string(bytes) + " bytes");

  PauliSum W;
  for (const auto& [i, b] : beta.entries()) W += ops.Q.at(i) * cplx(b);

  const auto& B = *basis_;
  blocks_.resize(B.sectors.size());
  w_min_ = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < B.sectors.size(); ++s) {
    const auto& sec = B.sectors[s];
    for (int k = 0; k < N; ++k) {
      Block blk;
      blk.k = k;
      blk.position.assign(sec.reps.size(), -1);
      for (std::size_t r = 0; r < sec.reps.size(); ++r)
        if (SymmetryBasis::allowed(sec.period[r], k, N)) {
          blk.position[r] = static_cast<int>(blk.reps.size());
          blk.reps.push_back(static_cast<int>(r));
        }
      const auto n = static_cast<Eigen::Index>(blk.reps.size());
      if (n == 0) continue;

      // <r',k|W|r,k> = sqrt(L_r / L_r') sum_{b ~ r'} w_b e^{i kappa l_b}
      Eigen::MatrixXcd Wk = Eigen::MatrixXcd::Zero(n, n);
      for (Eigen::Index col = 0; col < n; ++col) {
        const int r = blk.reps[col];
        const std::uint64_t state = sec.reps[r];
        for (const auto& [p, c] : W.terms()) {
          const std::uint64_t target = state ^ p.x;
          if (B.sector_of[target] != static_cast<int>(s)) continue;
          const int rt = B.rep_of[target];
          const int row = blk.position[rt];
          if (row < 0) continue;
          const double norm = std::sqrt(static_cast<double>(sec.period[r]) / sec.period[rt]);
          Wk(row, col) += norm * c * apply_phase(p, state) * phase_factor(k, B.shift_of[target], N);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Wk);
      if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "block eigensolver failed");
      blk.U = es.eigenvectors();
      blk.w = es.eigenvalues();
      w_min_ = std::min(w_min_, blk.w.minCoeff());
      blocks_[s].push_back(std::move(blk));
    }
  }

  double z = 0.0;
  for (const auto& sec_blocks : blocks_)
    for (const auto& blk : sec_blocks) z += (-(blk.w.array() - w_min_)).exp().sum();
  log_z_ = -w_min_ + std::log(z);

  // rho_s(b, b') = sum_k f_k(b) R_k(r_b, r_b') conj(f_k(b')), f_k(b) = e^{-i kappa l_b} / sqrt(L)
  rho_.resize(B.sectors.size());
  for (std::size_t s = 0; s < B.sectors.size(); ++s) {
    const auto& sec = B.sectors[s];
    const auto dim = static_cast<Eigen::Index>(sec.states.size());
    rho_[s] = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& blk : blocks_[s]) {
      Eigen::VectorXd p = (-(blk.w.array() - w_min_)).exp() / z;
      Eigen::MatrixXcd R = blk.U * p.asDiagonal() * blk.U.adjoint();
      std::vector<Eigen::Index> idx;
      std::vector<int> pos;
      std::vector<cplx> amp;
      for (Eigen::Index a = 0; a < dim; ++a) {
        const std::uint64_t st = sec.states[a];
        const int row = blk.position[B.rep_of[st]];
        if (row < 0) continue;
        idx.push_back(a);
        pos.push_back(row);
        amp.push_back(std::conj(phase_factor(blk.k, B.shift_of[st], N)) /
                      std::sqrt(static_cast<double>(sec.period[B.rep_of[st]])));
      }
      for (std::size_t u = 0; u < idx.size(); ++u)
        for (std::size_t v = 0; v < idx.size(); ++v)
          rho_[s](idx[u], idx[v]) += amp[u] * R(pos[u], pos[v]) * std::conj(amp[v]);
    }
  }
}

double GGEnsemble::trace() const {
  double t = 0.0;
  for (const auto& r : rho_) t += r.diagonal().real().sum();
  return t;
}

double GGEnsemble::hermiticity_residual() const {
  double worst = 0.0;
  for (const auto& r : rho_) worst = std::max(worst, (r - r.adjoint()).cwiseAbs().maxCoeff());
  return worst;
}

double GGEnsemble::commutator_residual(const PauliSum& Q) const {
  require_on_ring(Q, N());
  const auto& B = *basis_;
  double worst = 0.0;
  for (std::size_t s = 0; s < B.sectors.size(); ++s) {
    const auto& sec = B.sectors[s];
    const auto dim = static_cast<Eigen::Index>(sec.states.size());
    Eigen::MatrixXcd Qs = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [p, c] : Q.terms())
      for (Eigen::Index a = 0; a < dim; ++a) {
        const std::uint64_t t = sec.states[a] ^ p.x;
        if (B.sector_of[t] != static_cast<int>(s)) continue;
        Qs(B.index_of[t], a) += c * apply_phase(p, sec.states[a]);
      }
    worst = std::max(worst, (Qs * rho_[s] - rho_[s] * Qs).cwiseAbs().maxCoeff());
  }
  return worst;
}

cplx GGEnsemble::average(const PauliSum& o) const {
  require_on_ring(o, N());
  const auto& B = *basis_;
  const std::uint64_t dim = std::uint64_t{1} << N();
  cplx acc{};
  for (const auto& [p, c] : o.terms()) {
    cplx term{};
    for (std::uint64_t b = 0; b < dim; ++b) {
      const std::uint64_t t = b ^ p.x;
      const int s = B.sector_of[b];
      if (B.sector_of[t] != s) continue;
      term += rho_[s](B.index_of[b], B.index_of[t]) * apply_phase(p, b);
    }
    acc += c * term;
  }
  return acc;
}

double GGEnsemble::real_average(const PauliSum& o) const {
  cplx v = average(o);
  if (std::abs(v.imag()) > 1e-13 * std::max(1.0, std::abs(v)))
    throw Error(ErrorCode::NonFinite, "average of a Hermitian observable has imaginary part " + std::to_string(v.imag()));
  return v.real();
}

GGEnsemble::BlockMatrix GGEnsemble::momentum_blocks(const PauliSum& o, int s, int t) const {
  // X[k][k'] = <s,k| o |t,k'> in the momentum-state bases of sectors s (rows) and t (columns).
  const auto& B = *basis_;
  const int N = this->N();
  const auto& rows = blocks_[s];
  const auto& cols = blocks_[t];
  const auto& sec_s = B.sectors[s];
  const auto& sec_t = B.sectors[t];
  BlockMatrix X(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    X[a].resize(cols.size());
    for (std::size_t b = 0; b < cols.size(); ++b)
      X[a][b] = Eigen::MatrixXcd::Zero(rows[a].reps.size(), cols[b].reps.size());
  }

  for (std::size_t b = 0; b < cols.size(); ++b) {
    const auto& cb = cols[b];
    for (std::size_t col = 0; col < cb.reps.size(); ++col) {
      const int r = cb.reps[col];
      const int L = sec_t.period[r];
      for (int j = 0; j < L; ++j) {
        const std::uint64_t state = rotate(sec_t.reps[r], j, N);
        const cplx amp = std::conj(phase_factor(cb.k, j, N)) / std::sqrt(static_cast<double>(L));
        for (const auto& [p, c] : o.terms()) {
          const std::uint64_t target = state ^ p.x;
          if (B.sector_of[target] != s) continue;
          const int rt = B.rep_of[target];
          const cplx val = amp * c * apply_phase(p, state) / std::sqrt(static_cast<double>(sec_s.period[rt]));
          for (std::size_t a = 0; a < rows.size(); ++a) {
            const int row = rows[a].position[rt];
            if (row < 0) continue;
            X[a][b](row, col) += val * phase_factor(rows[a].k, B.shift_of[target], N);
          }
        }
      }
    }
  }
  return X;
}

const GGEnsemble::SpectralCache& GGEnsemble::spectral() const {
  std::call_once(spectral_->once, [this] {
    const double z = std::exp(-log_z_ - w_min_);  // 1 / sum e^{-(w - w_min)}
    auto& sc = *spectral_;
    sc.pplus.resize(blocks_.size());
    sc.eminus.resize(blocks_.size());
    for (std::size_t s = 0; s < blocks_.size(); ++s)
      for (const auto& blk : blocks_[s]) {
        // rho e^{W} = U diag(p e^{w}) U^dag
        Eigen::VectorXd pe = ((-(blk.w.array() - w_min_)).exp() * z * blk.w.array().exp()).matrix();
        Eigen::VectorXd em = (-blk.w.array()).exp().matrix();
        sc.pplus[s].push_back(blk.U * pe.asDiagonal() * blk.U.adjoint());
        sc.eminus[s].push_back(blk.U * em.asDiagonal() * blk.U.adjoint());
      }
  });
  return *spectral_;
}

cplx GGEnsemble::kms_rhs(const PauliSum& o1, const PauliSum& o2) const {
  require_on_ring(o1, N());
  require_on_ring(o2, N());
  const auto& B = *basis_;
  const int nsec = static_cast<int>(B.sectors.size());
  int flips = 0;
  for (const auto* o : {&o1, &o2})
    for (const auto& [p, c] : o->terms()) flips = std::max(flips, std::popcount(p.x));

  const SpectralCache& sc = spectral();
  cplx acc{};
  for (int s = 0; s < nsec; ++s)
    for (int t = 0; t < nsec; ++t) {
      if (B.magnetisation_blocks && std::abs(s - t) > flips) continue;
      BlockMatrix X2 = momentum_blocks(o2, s, t);
      BlockMatrix X1 = momentum_blocks(o1, t, s);
      for (std::size_t a = 0; a < blocks_[s].size(); ++a)
        for (std::size_t b = 0; b < blocks_[t].size(); ++b) {
          if (X2[a][b].cwiseAbs().maxCoeff() == 0.0 || X1[b][a].cwiseAbs().maxCoeff() == 0.0) continue;
          Eigen::MatrixXcd left = sc.pplus[s][a] * X2[a][b] * sc.eminus[t][b];
          acc += (left.transpose().cwiseProduct(X1[b][a])).sum();
        }
    }
  return acc;
}

}  // namespace ekms::chain
