#pragma once

#include <complex>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phasequant::model {

/// Even polynomial well V(x) = Σ c_m x^(2m), m ≥ 1, with V(0) = 0.
///
/// Energies are measured from the well bottom and p²(x, E) = 2(E − V(x)).
/// Only single-minimum wells are accepted: every coefficient is
/// non-negative and the highest one is strictly positive.
class SymmetricPotential {
 public:
  /// Keys are the even powers 2m (2, 4, 6, ...), values the coefficients.
  explicit SymmetricPotential(std::map<int, double> coefficients, double hbar = 1.0);

  /// Parses the `2m:c_m` comma-separated form, e.g. `2:0.5,10:500`.
  static SymmetricPotential parse(std::string_view text, double hbar = 1.0);

  static SymmetricPotential harmonic() { return SymmetricPotential({{2, 0.5}}); }
  /// x^(2m)/2.
  static SymmetricPotential homogeneous(int power);
  /// x²/2 + λ x¹⁰/2.
  static SymmetricPotential decadic(double lambda);

  const std::map<int, double>& coefficients() const { return coefficients_; }
  double hbar() const { return hbar_; }
  int degree() const { return coefficients_.rbegin()->first; }

  /// True for exactly x²/2 (the analytic harmonic formulas apply).
  bool is_unit_harmonic() const;

  double value(double x) const;
  double derivative(double x) const;

  /// n-th derivative of Q(z) = p²(z, E) = 2(E − V(z)) at a complex point.
  std::complex<double> q_derivative(double energy, std::complex<double> z, int n) const;

  /// Canonical `2m:c_m` text; round-trips through parse().
  std::string to_string() const;

 private:
  std::map<int, double> coefficients_;
  double hbar_;
};

struct TurningPoints {
  double t1;
  double t2;
  double energy;
};

/// p²(x, E) = 2(E − V(x)).
double momentum_sq(const SymmetricPotential& v, double energy, double x);

/// Positive root t2 of p²(·, E) and its mirror t1 = −t2.
TurningPoints turning_point(const SymmetricPotential& v, double energy);

/// S(x) = ∫_{t1}^{x} p dx′ for t1 ≤ x ≤ t2 (S(t1) = 0).
double classical_action(const SymmetricPotential& v, double energy, double x);

/// ∫_x^{t2} p dx′ for 0 ≤ x ≤ t2; accurate as x → t2.
double action_to_turning_point(const SymmetricPotential& v, double energy, double x);

/// ∫_{t2}^{x} |p| dx′ for x ≥ t2 (forbidden-side action).
double forbidden_action(const SymmetricPotential& v, double energy, double x);

/// Smallest x ≥ t2 where the forbidden action reaches `action`.
double forbidden_action_point(const SymmetricPotential& v, double energy, double action);

}  // namespace phasequant::model
