#include "ekms/chain/pauli.hpp"

#include <bit>
#include <cmath>

#include "ekms/error.hpp"

namespace ekms::chain {

namespace {

cplx i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

int PauliString::weight() const { return std::popcount(x | z); }

PauliString PauliString::site(char op, int pos) {
  if (pos < 0 || pos >= 64) throw Error(ErrorCode::DimensionMismatch, "site index out of range");
  const std::uint64_t bit = std::uint64_t{1} << pos;
  switch (op) {
    case 'I': return {};
    case 'X': return {bit, 0};
    case 'Z': return {0, bit};
    case 'Y': return {bit, bit};
  }
  throw Error(ErrorCode::DomainError, std::string("unknown Pauli factor '") + op + "'");
}

std::string PauliString::to_string() const {
  if (identity()) return "I";
  std::string out;
  for (int j = 0; j < 64; ++j) {
    bool bx = (x >> j) & 1, bz = (z >> j) & 1;
    if (!bx && !bz) continue;
    if (!out.empty()) out += ' ';
    out += bx ? (bz ? 'Y' : 'X') : 'Z';
    out += std::to_string(j);
  }
  return out;
}

PauliProduct multiply(const PauliString& a, const PauliString& b) {
  PauliString c{a.x ^ b.x, a.z ^ b.z};
  int k = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) + 2 * std::popcount(a.z & b.x) - std::popcount(c.x & c.z);
  return {i_power(k), c};
}

bool commute(const PauliString& a, const PauliString& b) {
  return (std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) % 2 == 0;
}

cplx apply_phase(const PauliString& p, std::uint64_t b) {
  int k = std::popcount(p.x & p.z) + 2 * std::popcount(p.z & b);
  return i_power(k);
}

void PauliSum::add(const PauliString& s, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.try_emplace(s, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

PauliSum& PauliSum::operator+=(const PauliSum& o) {
  for (const auto& [s, c] : o.terms_) add(s, c);
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& o) {
  for (const auto& [s, c] : o.terms_) add(s, -c);
  return *this;
}

PauliSum& PauliSum::operator*=(cplx c) {
  if (c == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [s, v] : terms_) v *= c;
  return *this;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  PauliSum out;
  for (const auto& [sa, ca] : a.terms())
    for (const auto& [sb, cb] : b.terms()) {
      PauliProduct p = multiply(sa, sb);
      out.add(p.string, ca * cb * p.phase);
    }
  return out;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  PauliSum out;
  for (const auto& [sa, ca] : a.terms())
    for (const auto& [sb, cb] : b.terms()) {
      if (commute(sa, sb)) continue;
      PauliProduct p = multiply(sa, sb);
      out.add(p.string, 2.0 * ca * cb * p.phase);
    }
  return out;
}

PauliSum PauliSum::adjoint() const {
  PauliSum out;
  for (const auto& [s, c] : terms_) out.terms_.emplace(s, std::conj(c));
  return out;
}

cplx PauliSum::normalized_trace() const {
  auto it = terms_.find(PauliString{});
  return it == terms_.end() ? cplx{} : it->second;
}

double PauliSum::max_abs() const {
  double m = 0.0;
  for (const auto& [s, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

double PauliSum::hs_norm() const {
  double acc = 0.0;
  for (const auto& [s, c] : terms_) acc += std::norm(c);
  return std::sqrt(acc);
}

PauliSum PauliSum::pruned(double tol) const {
  PauliSum out;
  for (const auto& [s, c] : terms_)
    if (std::abs(c) > tol) out.terms_.emplace(s, c);
  return out;
}

bool PauliSum::hermitian(double tol) const {
  for (const auto& [s, c] : terms_)
    if (std::abs(c.imag()) > tol) return false;
  return true;
}

std::uint64_t PauliSum::support() const {
  std::uint64_t m = 0;
  for (const auto& [s, c] : terms_) m |= s.support();
  return m;
}

std::uint64_t rotate(std::uint64_t bits, int shift, int N) {
  shift = ((shift % N) + N) % N;
  if (shift == 0) return bits;
  const std::uint64_t mask = N == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << N) - 1);
  bits &= mask;
  return ((bits << shift) | (bits >> (N - shift))) & mask;
}

PauliSum PauliSum::translated(int shift, int N) const {
  if (N < 64 && (support() >> N) != 0) throw Error(ErrorCode::DimensionMismatch, "operator extends beyond the ring");
  PauliSum out;
  for (const auto& [s, c] : terms_) out.add(PauliString{rotate(s.x, shift, N), rotate(s.z, shift, N)}, c);
  return out;
}

}  // namespace ekms::chain
