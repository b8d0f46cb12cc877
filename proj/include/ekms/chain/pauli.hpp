#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>

namespace ekms::chain {

using cplx = std::complex<double>;

/// P = i^{|x & z|} X^x Z^z over up to 64 sites; (1,1) on a site is Y.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  bool identity() const { return (x | z) == 0; }
  std::uint64_t support() const { return x | z; }
  int weight() const;
  auto operator<=>(const PauliString&) const = default;

  /// Single-site factor: 'I', 'X', 'Y' or 'Z'.
  static PauliString site(char op, int pos);
  /// "X0 Y1 Z3" style; identity renders as "I".
  std::string to_string() const;
};

/// P1 * P2 = phase * P3, phase a power of i.
struct PauliProduct {
  cplx phase;
  PauliString string;
};
PauliProduct multiply(const PauliString& a, const PauliString& b);
bool commute(const PauliString& a, const PauliString& b);

/// P|b> = phase(b) |b ^ x>.
cplx apply_phase(const PauliString& p, std::uint64_t basis_state);

/// Linear combination of Pauli strings.
class PauliSum {
 public:
  PauliSum() = default;
  PauliSum(const PauliString& s, cplx c = 1.0) { add(s, c); }

  static PauliSum identity(cplx c = 1.0) { return PauliSum(PauliString{}, c); }

  void add(const PauliString& s, cplx c);
  const std::map<PauliString, cplx>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  PauliSum& operator+=(const PauliSum& o);
  PauliSum& operator-=(const PauliSum& o);
  PauliSum& operator*=(cplx c);
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx c) { return a *= c; }
  friend PauliSum operator*(cplx c, PauliSum a) { return a *= c; }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b);

  PauliSum adjoint() const;
  /// Coefficient of the identity string, i.e. tr(O) / 2^N.
  cplx normalized_trace() const;
  /// Largest |coefficient|; the Pauli basis is orthonormal for tr(A^dag B) / 2^N.
  double max_abs() const;
  double hs_norm() const;
  /// Drops terms with |c| <= tol.
  PauliSum pruned(double tol = 1e-14) const;
  bool hermitian(double tol = 1e-12) const;
  std::uint64_t support() const;

  /// Cyclic translation by `shift` sites on an N-site ring.
  PauliSum translated(int shift, int N) const;

 private:
  std::map<PauliString, cplx> terms_;
};

PauliSum commutator(const PauliSum& a, const PauliSum& b);

/// Cyclic bit rotation of a state or mask by `shift` on N sites (site j -> j + shift).
std::uint64_t rotate(std::uint64_t bits, int shift, int N);

}  // namespace ekms::chain
