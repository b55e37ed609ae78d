#include "phasequant/spectrum.hpp"

#include <cmath>
// pchip.hpp calls an unqualified isnan.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "phasequant/error.hpp"

namespace phasequant::spectrum {

namespace {

constexpr double kPi = std::numbers::pi;

// Runs body(i) for i in [0, count) on `jobs` threads (sequentially for jobs <= 1).
template <class Body>
void parallel_for(int count, int jobs, Body body) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, count);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct NodeResult {
  double ntilde = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool failed = true;
};

NodeResult record(const SymmetricPotential& v, const qlm::PhaseSolution& sol) {
  NodeResult r;
  r.ntilde = ntilde_of(sol);
  r.iterations = sol.iterations;
  r.residual = qlm::milne_residual(sol, v);
  r.failed = false;
  return r;
}

}  // namespace

qlm::PhaseSolution solve_at(const SymmetricPotential& v, double energy, const SweepOptions& options,
                            const qlm::RiccatiField* warm) {
  const auto grid = qlm::make_grid(v, energy, options.grid);
  const auto bc = qlm::make_boundary_condition(v, energy, options.bc_method, options.k_cap);
  if (warm != nullptr && !warm->grid.empty()) {
    try {
      return qlm::qlm_solve(v, energy, qlm::resample(v, *warm, grid, energy), bc, options.solve);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoConvergence) throw;
      // fall back to a cold start
    }
  }
  return qlm::qlm_solve(v, energy, qlm::trial_airy(v, energy, grid), bc, options.solve);
}

SpectrumTable oscillation_number_sweep(const SymmetricPotential& v, double e_min, double e_max,
                                       int samples, const SweepOptions& options) {
  if (!(e_min > 0.0) || !(e_max > e_min)) {
    throw Error(ErrorKind::InvalidArgument, "sweep needs 0 < e_min < e_max");
  }
  if (samples < 4) throw Error(ErrorKind::InvalidArgument, "sweep needs at least 4 samples");

  SpectrumTable table;
  table.potential = v.to_string();
  table.hbar = v.hbar();
  table.bc_method = options.bc_method;
  table.energies.resize(samples);
  for (int i = 0; i < samples; ++i) {
    table.energies[i] = e_min + (e_max - e_min) * i / (samples - 1);
  }

  std::vector<NodeResult> results(samples);
  if (options.jobs <= 1) {
    qlm::RiccatiField previous;
    for (int i = 0; i < samples; ++i) {
      try {
        const auto sol = solve_at(v, table.energies[i], options, previous.grid.empty() ? nullptr : &previous);
        results[i] = record(v, sol);
        previous = sol.field;
      } catch (const Error&) {
        previous = {};
      }
    }
  } else {
    parallel_for(samples, options.jobs, [&](int i) {
      try {
        results[i] = record(v, solve_at(v, table.energies[i], options));
      } catch (const Error&) {
      }
    });
  }

  int failures = 0;
  for (const auto& r : results) {
    table.ntilde.push_back(r.ntilde);
    table.failed.push_back(r.failed);
    table.iterations.push_back(r.iterations);
    table.residuals.push_back(r.residual);
    failures += r.failed ? 1 : 0;
  }
  if (10 * failures > samples) {
    throw Error(ErrorKind::NoConvergence, "more than 10% of the sweep nodes failed");
  }
  if (options.with_semiclassical) {
    for (const double e : table.energies) table.nsc.push_back(semiclassical::nsc(v, e));
  }

  if (options.refine_eigenvalues) {
    struct Task {
      int n;
      double lo;
      double hi;
    };
    std::vector<Task> tasks;
    int prev = -1;
    for (int i = 0; i < samples; ++i) {
      if (table.failed[i]) continue;
      if (prev >= 0) {
        const double a = table.ntilde[prev];
        const double b = table.ntilde[i];
        for (double m = std::floor(a) + 1.0; m <= b; m += 1.0) {
          tasks.push_back({static_cast<int>(m) - 1, table.energies[prev], table.energies[i]});
        }
      }
      prev = i;
    }
    std::vector<Level> levels(tasks.size());
    std::vector<char> ok(tasks.size(), 0);
    parallel_for(static_cast<int>(tasks.size()), options.jobs, [&](int t) {
      try {
        levels[t] = {tasks[t].n, refine_level(v, tasks[t].n, tasks[t].lo, tasks[t].hi, options)};
        ok[t] = 1;
      } catch (const Error&) {
      }
    });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (ok[t]) table.eigenvalues.push_back(levels[t]);
    }
  }
  return table;
}

double interpolate_ntilde(const SpectrumTable& table, double energy) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < table.energies.size(); ++i) {
    if (table.failed[i]) continue;
    x.push_back(table.energies[i]);
    y.push_back(table.ntilde[i]);
  }
  if (x.size() < 4) throw Error(ErrorKind::InvalidArgument, "interpolation needs 4 good nodes");
  if (energy < x.front() || energy > x.back()) {
    throw Error(ErrorKind::InvalidArgument, "energy outside the sweep range");
  }
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x), std::move(y));
  return spline(energy);
}

double interpolated_crossing(const SpectrumTable& table, double target) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < table.energies.size(); ++i) {
    if (table.failed[i]) continue;
    x.push_back(table.energies[i]);
    y.push_back(table.ntilde[i]);
  }
  if (x.size() < 4 || target < y.front() || target > y.back()) {
    throw Error(ErrorKind::BracketNotFound, "target oscillation number outside the sweep");
  }
  const double lo = x.front();
  const double hi = x.back();
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x), std::move(y));
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve([&](double e) { return spline(e) - target; }, lo, hi,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

double refine_level(const SymmetricPotential& v, int n, double lo, double hi,
                    const SweepOptions& options) {
  const double target = n + 1.0;
  qlm::RiccatiField warm;
  const auto f = [&](double e) {
    const auto sol = solve_at(v, e, options, warm.grid.empty() ? nullptr : &warm);
    warm = sol.field;
    return ntilde_of(sol) - target;
  };
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw Error(ErrorKind::BracketNotFound, "level not bracketed");
  }
  // Illinois regula falsi: keeps the bracket, superlinear on smooth Ñ.
  int side = 0;
  double estimate = lo;
  for (int it = 0; it < 80; ++it) {
    const double next = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    const double step = std::abs(next - estimate);
    estimate = next;
    const double fe = f(estimate);
    if (fe == 0.0) return estimate;
    if (step < options.eigen_tol * std::max(1.0, estimate) && it > 0) return estimate;
    if (hi - lo < options.eigen_tol * std::max(1.0, estimate)) return estimate;
    if (fe < 0.0) {
      lo = estimate;
      f_lo = fe;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = estimate;
      f_hi = fe;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  // Ñ is resolved to ~1e-12, so a tiny residual means the limit is noise.
  if (std::abs(f(estimate)) < 1e-9) return estimate;
  throw Error(ErrorKind::NoConvergence, "eigenvalue refinement did not converge");
}

double eigenvalue(const SymmetricPotential& v, int n, double tol, const SweepOptions& options) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "level index must be >= 0");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  SweepOptions opts = options;
  opts.eigen_tol = tol;
  const double target = n + 1.0;
  const double guess = semiclassical::airy_quantize(v, n);
  const double f0 = ntilde_of(solve_at(v, guess, opts)) - target;
  if (f0 == 0.0) return guess;
  // Walk away from the guess in the direction of the level until the sign flips.
  double step = 0.05 * guess;
  double a = guess;
  double fa = f0;
  for (int it = 0; it < 60; ++it) {
    double b = f0 < 0.0 ? a + step : std::max(a - step, 0.5 * a);
    const double fb = ntilde_of(solve_at(v, b, opts)) - target;
    if ((fb > 0.0) != (fa > 0.0) || fb == 0.0) {
      return f0 < 0.0 ? refine_level(v, n, a, b, opts) : refine_level(v, n, b, a, opts);
    }
    a = b;
    fa = fb;
    step *= 2.0;
  }
  throw Error(ErrorKind::BracketNotFound, "could not bracket the level");
}

Wavefunction eigenfunction(const SymmetricPotential& v, double energy, const SweepOptions& options) {
  const auto sol = solve_at(v, energy, options);
  const double nt = ntilde_of(sol);
  const long level = std::lround(nt) - 1;
  if (level < 0 || std::abs(nt - (level + 1.0)) > 1e-6) {
    throw Error(ErrorKind::NotAnEigenvalue, "oscillation number is not an integer at this energy");
  }
  const int n = static_cast<int>(level);
  const double t2 = model::turning_point(v, energy).t2;
  const std::size_t m = sol.grid.size();
  const double parity = n % 2 == 0 ? 1.0 : -1.0;

  // σ anchored at (n+1)π/2 at the origin. Past t2, sin σ = (−1)ⁿ sin(∫_x^∞ ∂σ)
  // keeps the small remainder exact where α is exponentially large.
  std::vector<double> half(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (sol.grid[i] < t2) {
      const double sigma = 0.5 * (n + 1) * kPi + (sol.sigma[i] - 0.5 * sol.total);
      half[i] = sol.alpha[i] * std::sin(sigma);
    } else {
      half[i] = parity * sol.alpha[i] * std::sin(sol.remaining[i]);
    }
  }
  if (parity < 0) half[0] = 0.0;  // sin((n+1)π/2) for odd n

  Wavefunction out;
  out.n = n;
  out.x.resize(2 * m - 1);
  out.psi.resize(2 * m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    out.x[m - 1 + i] = sol.grid[i];
    out.psi[m - 1 + i] = half[i];
    out.x[m - 1 - i] = -sol.grid[i];
    out.psi[m - 1 - i] = parity * half[i];
  }
  const double h = sol.grid[1] - sol.grid[0];
  double norm = 0.0;
  for (const double p : out.psi) norm += p * p;
  norm = std::sqrt(norm * h);
  const double probe = n % 2 == 0 ? half[0] : half[1];
  const double sign = probe < 0.0 ? -1.0 : 1.0;
  for (double& p : out.psi) p *= sign / norm;
  return out;
}

double relative_l2_difference(const Wavefunction& a, const std::vector<double>& bx,
                              const std::vector<double>& by) {
  const double h = a.x[1] - a.x[0];
  const std::size_t count = a.x.size();
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t k = 0; k < bx.size(); ++k) {
    double value = 0.0;
    if (bx[k] >= a.x.front() && bx[k] <= a.x.back()) {
      const long centre = static_cast<long>(std::floor((bx[k] - a.x.front()) / h));
      const long first = std::clamp<long>(centre - 2, 0, static_cast<long>(count) - 6);
      for (long j = first; j < first + 6; ++j) {
        double w = 1.0;
        for (long l = first; l < first + 6; ++l) {
          if (l != j) w *= (bx[k] - a.x[l]) / (a.x[j] - a.x[l]);
        }
        value += a.psi[j] * w;
      }
    }
    diff += (value - by[k]) * (value - by[k]);
    ref += by[k] * by[k];
  }
  return std::sqrt(diff / ref);
}

std::vector<SpectrumTable> lambda_sweep(const std::vector<double>& lambdas, double e_min,
                                        double e_max, int samples, const SweepOptions& options) {
  std::vector<SpectrumTable> out;
  for (const double lambda : lambdas) {
    if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
    auto table = oscillation_number_sweep(model::SymmetricPotential::decadic(lambda), e_min, e_max,
                                          samples, options);
    table.lambda = lambda;
    out.push_back(std::move(table));
  }
  return out;
}

}  // namespace phasequant::spectrum
