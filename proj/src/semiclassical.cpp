#include "phasequant/semiclassical.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "phasequant/diffalg.hpp"
#include "phasequant/error.hpp"
#include "phasequant/special.hpp"

namespace phasequant::semiclassical {

namespace {

constexpr double kPi = std::numbers::pi;

// Root of a function increasing in E, bracketed by expanding from `guess`.
template <class F>
double solve_increasing(F&& f, double guess, int bits) {
  double lo = guess;
  double hi = guess;
  double f_lo = f(lo);
  double f_hi = f_lo;
  int expansions = 0;
  while (f_lo > 0.0) {
    hi = lo;
    f_hi = f_lo;
    lo *= 0.5;
    f_lo = f(lo);
    if (++expansions > 200) throw Error(ErrorKind::BracketNotFound, "no lower energy bracket");
  }
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = f(hi);
    if (++expansions > 200) throw Error(ErrorKind::BracketNotFound, "no upper energy bracket");
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(bits), max_iter);
  if (max_iter >= 200) throw Error(ErrorKind::NoConvergence, "energy root did not converge");
  return 0.5 * (a + b);
}

double total_action(const SymmetricPotential& v, double energy) {
  return 2.0 * model::action_to_turning_point(v, energy, 0.0);
}

}  // namespace

double nsc(const SymmetricPotential& v, double energy) {
  if (!(energy > 0.0)) throw Error(ErrorKind::NonPositiveEnergy, "nsc needs E > 0");
  return total_action(v, energy) / (kPi * v.hbar()) + 0.5;
}

double wkb_quantize(const SymmetricPotential& v, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "level index must be >= 0");
  const auto f = [&](double e) { return nsc(v, e) - (n + 1.0); };
  return solve_increasing(f, n + 0.5, 46);
}

std::complex<double> dunham_integral(const SymmetricPotential& v, double energy, int k,
                                     const ContourOptions& options) {
  if (!(energy > 0.0)) throw Error(ErrorKind::NonPositiveEnergy, "dunham_integral needs E > 0");
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "Dunham order must be >= 0");
  const auto term = diffalg::riccati_term(2 * k);
  const int order = term.order();
  const auto tp = model::turning_point(v, energy);
  const double b = options.semi_minor_factor * tp.t2;
  const double a = tp.t2 + b;

  // Integrand samples f(θ)·z′(θ) at θ_j = 2πj/N, clockwise.
  const auto sample = [&](int nodes) {
    std::vector<std::complex<double>> values(nodes);
    std::complex<double> previous_p = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double theta = 2.0 * kPi * j / nodes;
      const std::complex<double> z(a * std::cos(theta), -b * std::sin(theta));
      const std::complex<double> dz(-a * std::sin(theta), -b * std::cos(theta));
      diffalg::JetPoint pt;
      pt.z = z;
      pt.t1 = tp.t1;
      pt.t2 = tp.t2;
      for (int n = 0; n <= order; ++n) pt.q.push_back(v.q_derivative(energy, z, n));
      std::complex<double> p = diffalg::radical(pt, diffalg::Branch::cut_between_turning_points);
      if (j > 0 && std::abs(p - previous_p) > std::abs(p + previous_p)) p = -p;
      previous_p = p;
      values[j] = term.evaluate_with_radical(pt, p) * dz;
    }
    return values;
  };

  const auto trapezoid = [](const std::vector<std::complex<double>>& values) {
    std::complex<double> sum = 0.0;
    for (const auto& f : values) sum += f;
    return sum * (2.0 * kPi / static_cast<double>(values.size()));
  };

  int nodes = options.min_nodes;
  auto values = sample(nodes);
  std::complex<double> estimate = trapezoid(values);
  while (true) {
    if (nodes * 2 > options.max_nodes) {
      throw Error(ErrorKind::ContourTooTight, "trapezoid rule did not converge on the contour");
    }
    nodes *= 2;
    auto refined = sample(nodes);
    const std::complex<double> next = trapezoid(refined);
    double scale = 0.0;
    for (const auto& f : refined) scale = std::max(scale, std::abs(f));
    const double change = std::abs(next - estimate);
    estimate = next;
    values = std::move(refined);
    if (change <= options.rel_tol * std::max(1.0, std::abs(next)) + 1e-15 * scale) break;
  }

  // Adjacent-node variation: the integrand must be resolved on the contour.
  double scale = 0.0;
  double jump = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    scale = std::max(scale, std::abs(values[j]));
    jump = std::max(jump, std::abs(values[j] - values[(j + 1) % values.size()]));
  }
  if (jump > 0.5 * scale && scale > 0.0) {
    throw Error(ErrorKind::ContourTooTight, "integrand varies too fast between contour nodes");
  }
  return estimate;
}

double dunham_quantize(const SymmetricPotential& v, int n, int k_max, Terminant terminant,
                       const ContourOptions& options) {
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
  const double hbar = v.hbar();
  const auto f = [&](double e) {
    double sum = 0.0;
    for (int k = 0; k < k_max; ++k) {
      double weight = std::pow(-hbar * hbar, k);
      if (k == k_max - 1 && k >= 1 && terminant == Terminant::stieltjes_half) weight *= 0.5;
      sum += weight * dunham_integral(v, e, k, options).real();
    }
    return sum - 2.0 * kPi * hbar * (n + 0.5);
  };
  try {
    return solve_increasing(f, wkb_quantize(v, n), 44);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BracketNotFound) {
      throw Error(ErrorKind::NoConvergence, std::string("Dunham condition: ") + e.what());
    }
    throw;
  }
}

double airy_xi0(const SymmetricPotential& v, double energy, double x) {
  const double ax = std::abs(x);
  const double t2 = model::turning_point(v, energy).t2;
  const double hbar = v.hbar();
  if (ax <= t2) {
    const double s = model::action_to_turning_point(v, energy, ax) / hbar;
    return -std::cbrt(std::pow(1.5 * s, 2.0));
  }
  const double s = model::forbidden_action(v, energy, ax) / hbar;
  return std::cbrt(std::pow(1.5 * s, 2.0));
}

namespace {

// ξ₀ at every grid node. Actions are accumulated cell by cell with a fixed
// Gauss rule; nodes close to t2, where √(t2 − x) spoils the fixed rule, use
// the endpoint-adapted quadrature of the model module instead.
std::vector<double> xi0_on_grid(const SymmetricPotential& v, double energy,
                                const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  std::vector<double> out(n);
  const double t2 = model::turning_point(v, energy).t2;
  const double hbar = v.hbar();
  const auto p_abs = [&](double x) { return std::sqrt(std::abs(model::momentum_sq(v, energy, x))); };
  const auto to_xi = [](double action, bool inside) {
    const double m = std::cbrt(std::pow(1.5 * action, 2.0));
    return inside ? -m : m;
  };
  double h_typ = n > 1 ? (grid.back() - grid.front()) / static_cast<double>(n - 1) : 1.0;
  const double near = 20.0 * h_typ;
  using Rule = boost::math::quadrature::gauss<double, 10>;

  // Allowed side, walking from t2 toward 0.
  std::size_t last_inside = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid[i] <= t2) last_inside = i;
  }
  if (last_inside != n) {
    double action = 0.0;
    for (std::size_t r = 0; r <= last_inside; ++r) {
      const std::size_t i = last_inside - r;
      if (t2 - grid[i] < near || r == 0) {
        action = model::action_to_turning_point(v, energy, grid[i]);
      } else {
        action += Rule::integrate(p_abs, grid[i], grid[i + 1]);
      }
      out[i] = to_xi(action / hbar, true);
    }
  }
  // Forbidden side, walking outward.
  double action = 0.0;
  for (std::size_t i = last_inside == n ? 0 : last_inside + 1; i < n; ++i) {
    if (grid[i] - t2 < near || i == 0 || grid[i - 1] <= t2) {
      action = model::forbidden_action(v, energy, grid[i]);
    } else {
      action += Rule::integrate(p_abs, grid[i - 1], grid[i]);
    }
    out[i] = to_xi(action / hbar, false);
  }
  return out;
}

}  // namespace

UniformPhase airy_uniform_phase(const SymmetricPotential& v, double energy,
                                const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidArgument, "grid not increasing");
  }
  if (grid.front() < 0.0) throw Error(ErrorKind::InvalidArgument, "grid must start at x >= 0");

  const auto tp = model::turning_point(v, energy);
  const double hbar = v.hbar();
  const double q_slope = std::abs(2.0 * v.derivative(tp.t2));
  const double xi_slope_at_t2 = std::cbrt(q_slope / (hbar * hbar));

  UniformPhase out;
  out.grid = grid;
  out.energy = energy;
  const std::size_t n = grid.size();
  out.xi0.resize(n);
  out.sigma_sc.resize(n);
  out.dsigma_sc.resize(n);
  out.log_dsigma_sc.resize(n);
  out.xi0 = xi0_on_grid(v, energy, grid);

  // φ(ξ) = arctan(Ai/Bi), tracked from the far end toward x = 0 with
  // sub-steps keeping |Δξ| < 0.5 and |Δφ| small, anchored at φ(+∞) = 0.
  std::vector<double> phi(n);
  double xi_prev = std::max(out.xi0[n - 1], 1.0);
  double phi_prev = special::airy_phase(xi_prev);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = n - 1 - r;
    const double target = out.xi0[i];
    while (xi_prev > target) {
      const double step = std::min({0.5, 0.5 / std::sqrt(std::max(std::abs(xi_prev), 1.0)),
                                    xi_prev - target});
      const double xi = xi_prev - step;
      const auto a = special::airy_scaled(xi);
      double wrapped = xi > 0.0 ? std::atan(a.ai / a.bi * std::exp(-2.0 * a.zeta))
                                : std::atan2(a.ai, a.bi);
      wrapped += 2.0 * kPi * std::round((phi_prev - wrapped) / (2.0 * kPi));
      phi_prev = wrapped;
      xi_prev = xi;
    }
    if (target >= xi_prev) {  // node beyond the anchor point
      phi[i] = special::airy_phase(target);
    } else {
      phi[i] = phi_prev;
    }
  }

  const double phi0 = special::airy_phase(airy_xi0(v, energy, 0.0));
  out.total = 2.0 * phi0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid[i];
    const double xi = out.xi0[i];
    out.sigma_sc[i] = out.total - phi[i];
    // ∂ₓσ^sc = ξ₀′ / (π (Ai² + Bi²)), ξ₀′ = |p|/(ħ√|ξ₀|).
    double xi_prime;
    if (std::abs(xi) < 1e-8) {
      xi_prime = xi_slope_at_t2;
    } else {
      const double p = std::sqrt(std::abs(model::momentum_sq(v, energy, x)));
      xi_prime = p / (hbar * std::sqrt(std::abs(xi)));
    }
    out.log_dsigma_sc[i] = std::log(xi_prime) - std::log(kPi) - special::log_airy_modulus_sq(xi);
    out.dsigma_sc[i] = std::exp(out.log_dsigma_sc[i]);
  }
  return out;
}

void write_csv(std::ostream& os, const UniformPhase& phase) {
  os << "x,xi0,sigma_sc,dsigma_sc\n";
  char buf[128];
  for (std::size_t i = 0; i < phase.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", phase.grid[i], phase.xi0[i],
                  phase.sigma_sc[i], phase.dsigma_sc[i]);
    os << buf;
  }
}

double airy_quantize(const SymmetricPotential& v, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "level index must be >= 0");
  const auto f = [&](double e) {
    return special::airy_phase(airy_xi0(v, e, 0.0)) - (n + 1.0) * kPi / 2.0;
  };
  return solve_increasing(f, wkb_quantize(v, n), 46);
}

std::string_view to_string(BcMethod method) {
  switch (method) {
    case BcMethod::wkb_p0: return "wkb_p0";
    case BcMethod::asymptotic_series: return "asymptotic_series";
    case BcMethod::harmonic_exact: return "harmonic_exact";
  }
  return "unknown";
}

BcMethod bc_method_from_string(std::string_view text) {
  if (text == "wkb" || text == "wkb_p0") return BcMethod::wkb_p0;
  if (text == "series" || text == "asymptotic_series") return BcMethod::asymptotic_series;
  if (text == "harmonic" || text == "harmonic_exact") return BcMethod::harmonic_exact;
  throw Error(ErrorKind::InvalidArgument, "unknown boundary-condition method `" +
                                              std::string(text) + "`");
}

BoundaryCondition bc_series(const SymmetricPotential& v, double energy, int k_cap) {
  if (!(energy > 0.0)) {
    throw Error(ErrorKind::ZeroMomentumAtOrigin, "p(0) vanishes for E <= 0");
  }
  auto& cache = diffalg::default_cache();
  if (k_cap < 0 || k_cap > cache.max_order()) {
    throw Error(ErrorKind::InvalidArgument, "k_cap outside the generated range");
  }
  const double hbar2 = v.hbar() * v.hbar();
  const int jet_order = 2 * k_cap + 2;
  const auto pt = diffalg::make_jet_point(v, energy, 0.0, jet_order);

  BoundaryCondition bc;
  bc.method = BcMethod::asymptotic_series;
  double weight = 1.0;
  // Growth is judged against the last nonzero term: for x^{2m} potentials the
  // low orders vanish identically at x = 0.
  int last_nonzero = 0;
  for (int k = 0; k <= k_cap; ++k) {
    const double term =
        weight * cache.sigma(k).evaluate(pt, diffalg::Branch::principal).real();
    if (k >= 1 && std::abs(term) > std::abs(bc.terms[last_nonzero])) break;
    bc.terms.push_back(term);
    if (term != 0.0) last_nonzero = k;
    weight *= hbar2;
  }
  bc.terms.resize(last_nonzero + 1);
  bc.order_used = last_nonzero;
  double sum = 0.0;
  for (int k = 0; k < bc.order_used; ++k) sum += bc.terms[k];
  sum += bc.order_used >= 1 ? 0.5 * bc.terms.back() : bc.terms.back();
  bc.value = sum;
  return bc;
}

double sc_phase_ambiguity(double s_x, double phi, double s_t2, double invariant_i, double c) {
  const double angle = s_x + phi;
  const double s = std::sin(angle);
  if (std::abs(s) < 1e-14) {
    throw Error(ErrorKind::PhasePole, "sin(S + phi) vanishes");
  }
  const double bracket = 1.0 / std::tan(s_t2 + 2.0 * phi) + 2.0 * invariant_i * c;
  const double cot_sigma = std::cos(angle) / s - bracket;
  // arccot onto (0, π), then place on the sheet of S + φ.
  const double base = kPi * std::floor(angle / kPi);
  const double principal = std::atan2(1.0, cot_sigma);
  return base + principal;
}

}  // namespace phasequant::semiclassical
