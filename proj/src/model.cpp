#include "phasequant/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "phasequant/error.hpp"

namespace phasequant::model {

namespace {

// Boost's error estimate carries a ~50·eps round-off floor; asking for less
// than that recurses to full depth on short intervals.
constexpr double kQuadTol = 1e-12;

template <class F>
double gk_integrate(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, kQuadTol);
}

// R(x) = (V(t2) − V(x))/(t2 − x) as a sum of positive terms for x ≥ 0, so
// p² = 2(t2 − x)R(x) carries no cancellation near the turning point.
double divided_difference(const SymmetricPotential& v, double t2, double x) {
  double sum = 0.0;
  for (const auto& [power, c] : v.coefficients()) {
    double term = 0.0;
    double xj = 1.0;
    for (int j = 0; j < power; ++j) {
      term += std::pow(t2, power - 1 - j) * xj;
      xj *= x;
    }
    sum += c * term;
  }
  return sum;
}

}  // namespace

SymmetricPotential::SymmetricPotential(std::map<int, double> coefficients, double hbar)
    : coefficients_(std::move(coefficients)), hbar_(hbar) {
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
    throw Error(ErrorKind::InvalidPotential, "hbar must be positive");
  }
  for (auto it = coefficients_.begin(); it != coefficients_.end();) {
    const auto [power, c] = *it;
    if (power < 2 || power % 2 != 0) {
      throw Error(ErrorKind::InvalidPotential,
                  "only even powers >= 2 are allowed, got " + std::to_string(power));
    }
    if (!std::isfinite(c) || c < 0.0) {
      throw Error(ErrorKind::InvalidPotential, "coefficients must be finite and non-negative");
    }
    it = (c == 0.0) ? coefficients_.erase(it) : std::next(it);
  }
  if (coefficients_.empty()) {
    throw Error(ErrorKind::InvalidPotential, "potential has no confining term");
  }
}

SymmetricPotential SymmetricPotential::parse(std::string_view text, double hbar) {
  std::map<int, double> coefficients;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorKind::InvalidPotential, "expected `power:coefficient`, got `" + item + "`");
    }
    const std::string power_text = item.substr(0, colon);
    const std::string coeff_text = item.substr(colon + 1);
    char* end = nullptr;
    const long power = std::strtol(power_text.c_str(), &end, 10);
    if (power_text.empty() || *end != '\0') {
      throw Error(ErrorKind::InvalidPotential, "bad power `" + power_text + "`");
    }
    const double c = std::strtod(coeff_text.c_str(), &end);
    if (coeff_text.empty() || *end != '\0') {
      throw Error(ErrorKind::InvalidPotential, "bad coefficient `" + coeff_text + "`");
    }
    if (coefficients.count(static_cast<int>(power)) != 0) {
      throw Error(ErrorKind::InvalidPotential, "duplicate power " + power_text);
    }
    coefficients[static_cast<int>(power)] = c;
  }
  return SymmetricPotential(std::move(coefficients), hbar);
}

SymmetricPotential SymmetricPotential::homogeneous(int power) {
  return SymmetricPotential({{power, 0.5}});
}

SymmetricPotential SymmetricPotential::decadic(double lambda) {
  return SymmetricPotential({{2, 0.5}, {10, 0.5 * lambda}});
}

bool SymmetricPotential::is_unit_harmonic() const {
  return coefficients_.size() == 1 && coefficients_.begin()->first == 2 &&
         coefficients_.begin()->second == 0.5;
}

double SymmetricPotential::value(double x) const {
  const double x2 = x * x;
  double sum = 0.0;
  for (const auto& [power, c] : coefficients_) sum += c * std::pow(x2, power / 2);
  return sum;
}

double SymmetricPotential::derivative(double x) const {
  double sum = 0.0;
  for (const auto& [power, c] : coefficients_) sum += c * power * std::pow(x, power - 1);
  return sum;
}

std::complex<double> SymmetricPotential::q_derivative(double energy, std::complex<double> z,
                                                      int n) const {
  // Q(z) = 2E − 2 Σ c z^k; the n-th derivative of z^k is k!/(k−n)! z^(k−n).
  std::complex<double> sum = (n == 0) ? std::complex<double>(2.0 * energy, 0.0) : 0.0;
  for (const auto& [power, c] : coefficients_) {
    if (power < n) continue;
    double falling = 1.0;
    for (int j = 0; j < n; ++j) falling *= power - j;
    sum -= 2.0 * c * falling * std::pow(z, power - n);
  }
  return sum;
}

std::string SymmetricPotential::to_string() const {
  std::string out;
  char buf[64];
  for (const auto& [power, c] : coefficients_) {
    std::snprintf(buf, sizeof buf, "%s%d:%.17g", out.empty() ? "" : ",", power, c);
    out += buf;
  }
  return out;
}

double momentum_sq(const SymmetricPotential& v, double energy, double x) {
  return 2.0 * (energy - v.value(x));
}

TurningPoints turning_point(const SymmetricPotential& v, double energy) {
  if (!(energy > 0.0)) {
    throw Error(ErrorKind::NonPositiveEnergy, "turning point needs E > 0");
  }
  double hi = 1.0;
  while (v.value(hi) < energy) hi *= 2.0;
  const auto f = [&](double x) { return v.value(x) - energy; };
  std::uintmax_t max_iter = 200;
  const auto [lo_root, hi_root] = boost::math::tools::toms748_solve(
      f, 0.0, hi, -energy, f(hi), boost::math::tools::eps_tolerance<double>(52), max_iter);
  const double t2 = 0.5 * (lo_root + hi_root);
  return {-t2, t2, energy};
}

double action_to_turning_point(const SymmetricPotential& v, double energy, double x) {
  const double t2 = turning_point(v, energy).t2;
  if (x < 0.0 || x > t2) {
    throw Error(ErrorKind::OutsideAllowedRegion, "x must lie in [0, t2]");
  }
  // x = t2 − u² turns the √ endpoint behaviour into a smooth integrand.
  const auto integrand = [&](double u) {
    return 2.0 * std::sqrt(2.0) * u * u * std::sqrt(divided_difference(v, t2, t2 - u * u));
  };
  return gk_integrate(integrand, 0.0, std::sqrt(t2 - x));
}

double classical_action(const SymmetricPotential& v, double energy, double x) {
  const auto tp = turning_point(v, energy);
  if (x < tp.t1 || x > tp.t2) {
    throw Error(ErrorKind::OutsideAllowedRegion, "classical_action needs t1 <= x <= t2");
  }
  if (x <= 0.0) return action_to_turning_point(v, energy, -x);
  const double half = action_to_turning_point(v, energy, 0.0);
  return 2.0 * half - action_to_turning_point(v, energy, x);
}

double forbidden_action(const SymmetricPotential& v, double energy, double x) {
  const double t2 = turning_point(v, energy).t2;
  if (x <= t2) return 0.0;
  const auto integrand = [&](double u) {
    return 2.0 * std::sqrt(2.0) * u * u * std::sqrt(divided_difference(v, t2, t2 + u * u));
  };
  return gk_integrate(integrand, 0.0, std::sqrt(x - t2));
}

double forbidden_action_point(const SymmetricPotential& v, double energy, double action) {
  const double t2 = turning_point(v, energy).t2;
  if (action <= 0.0) return t2;
  double hi = t2 * 1.5;
  while (forbidden_action(v, energy, hi) < action) hi = t2 + 2.0 * (hi - t2);
  const auto f = [&](double x) { return forbidden_action(v, energy, x) - action; };
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, t2, hi, -action, f(hi), boost::math::tools::eps_tolerance<double>(40), max_iter);
  return 0.5 * (a + b);
}

}  // namespace phasequant::model
