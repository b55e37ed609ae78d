#pragma once

namespace phasequant::special {

/// Ai, Bi and their derivatives at x. For x > 0 the values are exponentially
/// scaled: ai·e^{-ζ} = Ai, bi·e^{ζ} = Bi with ζ = (2/3)x^{3/2} (`zeta`);
/// for x ≤ 0, zeta = 0 and the values are unscaled.
struct AiryScaled {
  double ai;
  double aip;
  double bi;
  double bip;
  double zeta;
};

AiryScaled airy_scaled(double x);

double airy_ai(double x);
double airy_bi(double x);
double airy_ai_prime(double x);
double airy_bi_prime(double x);

/// Continuous branch of arctan(Ai(ξ)/Bi(ξ)), zero at ξ → +∞ and increasing
/// as ξ decreases (π/6 at ξ = 0, ≈ (2/3)|ξ|^{3/2} + π/4 for ξ ≪ 0).
double airy_phase(double xi);

/// log(Ai² + Bi²) without overflow.
double log_airy_modulus_sq(double xi);

double gamma(double x);

}  // namespace phasequant::special
