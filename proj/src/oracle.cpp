#include "phasequant/oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "phasequant/error.hpp"
#include "phasequant/special.hpp"

namespace phasequant::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_odd_integer(double nu) {
  const double r = std::round(nu);
  return r == nu && static_cast<long long>(r) % 2 != 0;
}

// Shooting outcome on [0, L]: interior sign changes of ψ (x > 0).
struct Shot {
  int nodes = 0;
  double last = 0.0;
};

// Extended precision: in double the accumulated rounding of a few thousand
// steps shifts the level by ~1e-11.
Shot shoot(const SymmetricPotential& v, double energy, Parity parity, double h, double length) {
  using real = long double;
  const real hh = static_cast<real>(h);
  const real scale = hh * hh / (12.0L * v.hbar() * v.hbar());
  // V as a polynomial in x², Horner form.
  std::vector<real> coeff(v.degree() / 2 + 1, 0.0L);
  for (const auto& [power, c] : v.coefficients()) coeff[power / 2] = c;
  const auto g = [&](real x) {
    const real x2 = x * x;
    real vx = 0.0L;
    for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) vx = vx * x2 + *it;
    return scale * 2.0L * (static_cast<real>(energy) - vx);
  };
  const int steps = static_cast<int>(std::ceil(length / h));
  real g_prev = g(0.0L);
  real g_cur = g(hh);
  real y_prev;
  real y_cur;
  if (parity == Parity::even) {
    y_prev = 1.0L;
    y_cur = (2.0L - 10.0L * g_prev) * y_prev / (2.0L * (1.0L + g_cur));
  } else {
    y_prev = 0.0L;
    y_cur = hh;
  }
  Shot shot;
  if (parity == Parity::even && (y_cur > 0.0L) != (y_prev > 0.0L)) ++shot.nodes;
  for (int i = 1; i < steps; ++i) {
    const real g_next = g((i + 1) * hh);
    const real y_next = ((2.0L - 10.0L * g_cur) * y_cur - (1.0L + g_prev) * y_prev) / (1.0L + g_next);
    if (y_next != 0.0L && y_cur != 0.0L && ((y_next > 0.0L) != (y_cur > 0.0L))) ++shot.nodes;
    y_prev = y_cur;
    y_cur = y_next;
    g_prev = g_cur;
    g_cur = g_next;
    if (std::abs(y_cur) > 1e150L) {
      y_cur *= 1e-150L;
      y_prev *= 1e-150L;
    }
  }
  shot.last = static_cast<double>(y_cur);
  return shot;
}

double max_momentum(const SymmetricPotential& v, double energy, double length) {
  // |p|/ħ on [0, L] peaks either at x = 0 or at x = L.
  const double at_zero = std::sqrt(std::abs(model::momentum_sq(v, energy, 0.0)));
  const double at_end = std::sqrt(std::abs(model::momentum_sq(v, energy, length)));
  return std::max(at_zero, at_end) / v.hbar();
}

}  // namespace

double weber_at_origin(double nu) {
  if (!(nu > -1.0)) throw Error(ErrorKind::InvalidArgument, "weber_at_origin needs nu > -1");
  if (is_odd_integer(nu)) return 0.0;
  return std::pow(2.0, nu / 2.0) * std::pow(kPi, 0.25) /
         (special::gamma(0.5 - nu / 2.0) * std::sqrt(special::gamma(1.0 + nu)));
}

double harmonic_bc(double nu) {
  if (!(nu > -1.0)) throw Error(ErrorKind::InvalidArgument, "harmonic_bc needs nu > -1");
  return 2.0 * special::gamma(nu / 2.0 + 1.0) / special::gamma((nu + 1.0) / 2.0);
}

double harmonic_wronskian(double nu) { return 2.0 / kPi * std::sin(kPi * nu); }

semiclassical::ErmakovParameters harmonic_optimal_params(double nu) {
  if (std::round(nu) == nu) {
    throw Error(ErrorKind::EigenvaluePole, "cot(pi nu) has a pole at integer nu");
  }
  const double invariant = 1.0 / kPi;
  const double c = -std::cos(kPi * nu) / std::sin(kPi * nu) / (2.0 * invariant);
  const double n_osc = harmonic_oscillation_number(nu);
  return {invariant, c, 2.0 * invariant * std::sin(kPi * n_osc)};
}

double numerov_box_length(const SymmetricPotential& v, double energy,
                          const NumerovOptions& options) {
  const double by_action =
      model::forbidden_action_point(v, energy, options.tail_action * v.hbar());
  // 2V(L) > 4E as a floor.
  double by_potential = 1.0;
  while (2.0 * v.value(by_potential) <= 4.0 * energy) by_potential *= 1.25;
  return std::max(by_action, by_potential);
}

double numerov_eigenvalue_at_step(const SymmetricPotential& v, int n, double h, double length) {
  const Parity parity = parity_of_level(n);
  const int m = n / 2;
  double lo = 0.0;
  double hi = std::max(1.0, semiclassical::wkb_quantize(v, n));
  int guard = 0;
  while (shoot(v, hi, parity, h, length).nodes <= m) {
    lo = hi;
    hi *= 1.5;
    if (++guard > 100) throw Error(ErrorKind::BracketNotFound, "no upper bracket for level");
  }
  if (shoot(v, lo, parity, h, length).nodes > m) {
    throw Error(ErrorKind::BracketNotFound, "lower bracket already above the level");
  }
  while (hi - lo > 4e-16 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (shoot(v, mid, parity, h, length).nodes <= m) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double numerov_eigenvalue(const SymmetricPotential& v, int n, const NumerovOptions& options) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "level index must be >= 0");
  // Size the box and step from a generous energy estimate.
  const double estimate = 1.5 * std::max(semiclassical::wkb_quantize(v, n), 0.5) + 1.0;
  const double length = numerov_box_length(v, estimate, options);
  const double h = options.phase_step / max_momentum(v, estimate, length);
  const double coarse = numerov_eigenvalue_at_step(v, n, h, length);
  if (!options.richardson) return coarse;
  const double fine = numerov_eigenvalue_at_step(v, n, h / 2.0, length);
  const double extrapolated = fine + (fine - coarse) / 15.0;
  if (std::abs(fine - coarse) > 1e3 * options.rel_tol * std::max(1.0, fine)) {
    throw Error(ErrorKind::NoConvergence, "Numerov step too coarse for the requested tolerance");
  }
  return extrapolated;
}

HalfLineSolution numerov_solution(const SymmetricPotential& v, double energy, Parity parity,
                                  double h, double length) {
  const double hbar2 = v.hbar() * v.hbar();
  const int steps = static_cast<int>(std::ceil(length / h));
  HalfLineSolution out;
  out.h = h;
  out.x.resize(steps + 1);
  out.psi.resize(steps + 1);
  std::vector<double> f(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    out.x[i] = i * h;
    f[i] = 1.0 + h * h * model::momentum_sq(v, energy, out.x[i]) / (12.0 * hbar2);
  }
  if (parity == Parity::even) {
    out.psi[0] = 1.0;
    out.psi[1] = (12.0 - 10.0 * f[0]) / (2.0 * f[1]);
  } else {
    out.psi[0] = 0.0;
    out.psi[1] = h;
  }
  for (int i = 1; i < steps; ++i) {
    out.psi[i + 1] = ((12.0 - 10.0 * f[i]) * out.psi[i] - f[i - 1] * out.psi[i - 1]) / f[i + 1];
  }
  return out;
}

Wavefunction numerov_wavefunction(const SymmetricPotential& v, double energy, Parity parity,
                                  const NumerovOptions& options) {
  const double length = numerov_box_length(v, energy, options);
  const double h = options.phase_step / max_momentum(v, energy, length);
  // Outward from 0 with the parity start, inward from L (stable for the decaying
  // solution), matched in value at the node nearest t2.
  auto half = numerov_solution(v, energy, parity, h, length);
  const std::size_t last = half.psi.size() - 1;
  const double t2 = model::turning_point(v, energy).t2;
  const std::size_t match = std::min<std::size_t>(last - 2, static_cast<std::size_t>(std::lround(t2 / h)));

  const double hbar2 = v.hbar() * v.hbar();
  const auto f = [&](std::size_t i) {
    return 1.0 + h * h * model::momentum_sq(v, energy, half.x[i]) / (12.0 * hbar2);
  };
  std::vector<double> inward(last + 1, 0.0);
  inward[last] = 0.0;
  inward[last - 1] = 1e-280;
  for (std::size_t i = last - 1; i > match; --i) {
    inward[i - 1] = ((12.0 - 10.0 * f(i)) * inward[i] - f(i + 1) * inward[i + 1]) / f(i - 1);
    if (std::abs(inward[i - 1]) > 1e200) {
      for (std::size_t j = i - 1; j <= last; ++j) inward[j] *= 1e-200;
    }
  }
  const double scale = half.psi[match] / inward[match];
  for (std::size_t i = match; i <= last; ++i) half.psi[i] = scale * inward[i];

  const std::size_t m = half.psi.size();
  Wavefunction out;
  out.x.resize(2 * m - 1);
  out.psi.resize(2 * m - 1);
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    out.x[m - 1 + i] = half.x[i];
    out.psi[m - 1 + i] = half.psi[i];
    out.x[m - 1 - i] = -half.x[i];
    out.psi[m - 1 - i] = sign * half.psi[i];
  }
  double norm = 0.0;
  for (const double p : out.psi) norm += p * p;
  norm = std::sqrt(norm * h);
  for (double& p : out.psi) p /= norm;
  return out;
}

int count_nodes(const std::vector<double>& psi) {
  int nodes = 0;
  double previous = 0.0;
  for (const double p : psi) {
    if (p == 0.0) continue;
    if (previous != 0.0 && (p > 0.0) != (previous > 0.0)) ++nodes;
    previous = p;
  }
  return nodes;
}

}  // namespace phasequant::oracle
