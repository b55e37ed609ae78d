#pragma once

// Exact differential algebra over the jet variables Q, Q′, Q″, ... of
// Q = p²(z, E), plus one formal radical P with P² = Q.
//
// Every term of the Riccati (Dunham) recurrence and of the phase-derivative
// series for circular carriers has a denominator made only of powers of Q and
// P, so an expression is kept as a finite sum
//
//     c · P^e · Q^m · Π_{n≥1} (Q⁽ⁿ⁾)^{a_n},   e ∈ {0, 1}, m ∈ ℤ, a_n ≥ 0,
//
// with exact rational c. That form is canonical: two expressions are equal iff
// their coefficient maps are equal.

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace phasequant::model {
class SymmetricPotential;
}

namespace phasequant::diffalg {

struct Monomial {
  int p_power = 0;         // 0 or 1
  int q0_power = 0;        // any integer
  std::vector<int> jets;   // jets[n-1] = exponent of Q⁽ⁿ⁾, trailing zeros trimmed

  auto operator<=>(const Monomial&) const = default;

  int max_derivative() const { return static_cast<int>(jets.size()); }
};

enum class Branch {
  principal,                 // P = principal √Q
  cut_between_turning_points // cut on [t1, t2], P → +p just above the cut
};

/// Jet values Q⁽ⁿ⁾(z), n = 0..order, at one (possibly complex) point.
struct JetPoint {
  std::complex<double> z;
  std::vector<std::complex<double>> q;
  double t1 = 0.0;  // used by the cut branch
  double t2 = 0.0;
};

JetPoint make_jet_point(const model::SymmetricPotential& v, double energy,
                        std::complex<double> z, int order);

/// √Q at `pt` on the requested sheet.
std::complex<double> radical(const JetPoint& pt, Branch branch);

class JetExpression {
 public:
  JetExpression() = default;

  static JetExpression constant(const mpq_class& c);
  static JetExpression radical();              // P
  static JetExpression jet(int n);             // Q⁽ⁿ⁾
  static JetExpression monomial(const mpq_class& c, Monomial m);

  JetExpression& operator+=(const JetExpression& rhs);
  JetExpression& operator-=(const JetExpression& rhs);
  JetExpression& operator*=(const mpq_class& c);
  friend JetExpression operator+(JetExpression a, const JetExpression& b) { return a += b; }
  friend JetExpression operator-(JetExpression a, const JetExpression& b) { return a -= b; }
  friend JetExpression operator*(JetExpression a, const mpq_class& c) { return a *= c; }
  friend JetExpression operator*(const JetExpression& a, const JetExpression& b);

  /// Multiplication by 1/P (= P/Q).
  JetExpression divided_by_radical() const;

  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  /// Highest derivative order of Q that occurs.
  int order() const;
  const std::map<Monomial, mpq_class>& terms() const { return terms_; }

  bool operator==(const JetExpression& other) const { return terms_ == other.terms_; }

  /// Deterministic plain-text canonical form, e.g. `-1/4*Q0^-1*Q1`.
  std::string to_string() const;

  std::complex<double> evaluate(const JetPoint& pt, Branch branch) const;
  /// Same, with the value of P supplied by the caller (e.g. tracked along a contour).
  std::complex<double> evaluate_with_radical(const JetPoint& pt, std::complex<double> p) const;

 private:
  void add_term(const Monomial& m, const mpq_class& c);

  std::map<Monomial, mpq_class> terms_;
};

/// Total z-derivative: Q⁽ⁿ⁾ → Q⁽ⁿ⁺¹⁾, P → Q′/(2P).
JetExpression jet_derivative(const JetExpression& e);

/// Memoized generator of ζₖ′ (Riccati/Dunham terms) and D₂ₖ = σ₂ₖ′
/// (phase-derivative terms for circular carriers). Thread-safe.
class TermCache {
 public:
  explicit TermCache(int max_order = 10) : max_order_(max_order) {}

  int max_order() const { return max_order_; }

  /// ζₖ′; k may go up to 2·max_order + 1 (Dunham order k uses ζ₂ₖ′).
  JetExpression riccati(int k);
  /// D₂ₖ; k ≤ max_order.
  JetExpression sigma(int k);

 private:
  JetExpression riccati_locked(int k);
  JetExpression sigma_locked(int k);

  int max_order_;
  std::mutex mutex_;
  std::vector<JetExpression> riccati_;
  std::vector<JetExpression> sigma_;
  std::vector<JetExpression> log_derivative_;  // [D′/D]_m
};

/// Process-wide cache (max order 10).
TermCache& default_cache();

JetExpression riccati_term(int k);
JetExpression sigma_term(int k);

/// Σ_j ζ′_{k−j} ζ′_j + ζ″_{k−1} for the given terms (exactly zero when the
/// recurrence is satisfied).
JetExpression riccati_residual(const std::vector<JetExpression>& zeta_prime, int k);

}  // namespace phasequant::diffalg
