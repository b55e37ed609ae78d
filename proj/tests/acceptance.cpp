// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "phasequant/diffalg.hpp"
#include "phasequant/error.hpp"
#include "phasequant/model.hpp"
#include "phasequant/oracle.hpp"
#include "phasequant/qlm.hpp"
#include "phasequant/semiclassical.hpp"
#include "phasequant/spectrum.hpp"

using namespace phasequant;
using model::SymmetricPotential;
using semiclassical::BcMethod;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records one check; the first failures are kept in the detail line.
  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail.clear();
    pass = false;
    if (detail.size() < 400) detail += (detail.empty() ? "" : "; ") + what;
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

int worker_count() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

spectrum::SweepOptions default_options() {
  spectrum::SweepOptions o;
  o.jobs = worker_count();
  return o;
}

// Quantities shared by several criteria, computed once.
struct Shared {
  std::map<std::string, spectrum::SpectrumTable> wide;
  std::vector<double> milne;  // residuals of every converged solution in this run
};

Shared& shared() {
  static Shared s;
  return s;
}

void collect(const spectrum::SpectrumTable& t) {
  for (std::size_t i = 0; i < t.residuals.size(); ++i) {
    if (!t.failed[i]) shared().milne.push_back(t.residuals[i]);
  }
}

void collect(const qlm::PhaseSolution& sol, const SymmetricPotential& v) {
  shared().milne.push_back(qlm::milne_residual(sol, v));
}

const spectrum::SpectrumTable& wide_sweep(const std::string& potential) {
  auto& cache = shared().wide;
  auto it = cache.find(potential);
  if (it != cache.end()) return it->second;
  auto table = spectrum::oscillation_number_sweep(SymmetricPotential::parse(potential), 0.2, 220.0, 45,
                                                  default_options());
  collect(table);
  return cache.emplace(potential, std::move(table)).first->second;
}

qlm::BoundaryCondition fixed_bc(double value) {
  qlm::BoundaryCondition bc;
  bc.value = value;
  bc.method = BcMethod::harmonic_exact;
  bc.terms = {value};
  return bc;
}

Outcome harmonic_exactness() {
  Outcome o;
  const auto h = SymmetricPotential::harmonic();
  auto opts = default_options();
  opts.bc_method = BcMethod::harmonic_exact;
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n = 0; n <= 10; ++n) {
    const double e = spectrum::eigenvalue(h, n, 1e-12, opts);
    worst = std::max(worst, std::abs(e - (n + 0.5)));
    collect(spectrum::solve_at(h, e, opts), h);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(worst < 1e-10, fmt("max |E_n - (n+1/2)| = %.3g", worst));
  o.check(seconds < 10.0, fmt("runtime %.1f s", seconds));
  o.note(fmt("n=0..10 max error %.2g, %.1f s", worst, seconds));
  return o;
}

Outcome optimal_phase() {
  Outcome o;
  const auto h = SymmetricPotential::harmonic();
  const double bc = std::tgamma(0.25) / (2.0 * std::tgamma(0.75));
  const auto grid = qlm::make_grid(h, 1.0);
  const auto sol = qlm::qlm_solve(h, 1.0, qlm::trial_airy(h, 1.0, grid), fixed_bc(bc));
  collect(sol, h);
  const double ratio = sol.total / kPi;
  o.check(std::abs(ratio - 1.5) < 1e-7, fmt("sigma(inf)/pi = %.12g", ratio));
  o.note(fmt("E=1, bc=%.10g: sigma(inf)/pi = %.12g", bc, ratio));
  return o;
}

Outcome quartic_ladder() {
  Outcome o;
  const auto q = SymmetricPotential::homogeneous(4);
  const auto start = std::chrono::steady_clock::now();
  const double e0 = spectrum::eigenvalue(q, 0, 1e-12, default_options());
  collect(spectrum::solve_at(q, e0, default_options()), q);
  const double numerov = oracle::numerov_eigenvalue(q, 0);
  const double wkb = semiclassical::wkb_quantize(q, 0);
  const double airy = semiclassical::airy_quantize(q, 0);
  const double dunham3 = semiclassical::dunham_quantize(q, 0, 3, semiclassical::Terminant::stieltjes_half);
  const double dunham2 = semiclassical::dunham_quantize(q, 0, 2, semiclassical::Terminant::none);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(std::floor(e0 * 1e5) == 53018.0, fmt("E0 = %.10f does not print as 0.53018", e0));
  o.check(std::abs(e0 - numerov) < 1e-8, fmt("|E0 - numerov| = %.3g", std::abs(e0 - numerov)));
  o.check(std::abs(wkb - 0.434) < 5e-4, fmt("wkb %.6f", wkb));
  o.check(std::abs(airy - 0.480) < 5e-4, fmt("airy %.6f", airy));
  o.check(std::abs(dunham3 - 0.483) < 5e-4, fmt("dunham k_max=3 %.6f", dunham3));
  o.check(std::abs(dunham2 - 0.490) < 5e-4, fmt("dunham k_max=2 %.6f", dunham2));
  o.check(seconds < 60.0, fmt("runtime %.1f s", seconds));
  o.note(fmt("E0 %.12f, numerov diff %.2g, %.1f s", e0, std::abs(e0 - numerov), seconds));
  o.note(fmt("wkb %.4f, airy %.4f", wkb, airy) + fmt(", dunham %.4f / %.4f", dunham3, dunham2));
  return o;
}

Outcome octic_errors() {
  Outcome o;
  const auto v = SymmetricPotential::homogeneous(8);
  const double e0 = oracle::numerov_eigenvalue(v, 0);
  const double wkb = 100.0 * (semiclassical::wkb_quantize(v, 0) - e0) / e0;
  const double airy = 100.0 * (semiclassical::airy_quantize(v, 0) - e0) / e0;
  o.check(std::abs(wkb + 38.0) <= 2.0, fmt("wkb error %.2f%%", wkb));
  o.check(std::abs(airy + 30.0) <= 2.0, fmt("airy error %.2f%%", airy));
  o.note(fmt("E0 %.8f: wkb %.2f%%, airy %.2f%%", e0, wkb, airy));
  return o;
}

Outcome decadic_strong_coupling() {
  Outcome o;
  const auto strong = SymmetricPotential::decadic(1000.0);
  const double quantum = spectrum::eigenvalue(strong, 0, 1e-12, default_options());
  collect(spectrum::solve_at(strong, quantum, default_options()), strong);
  const double wkb = semiclassical::wkb_quantize(strong, 0);
  const double e5 = oracle::numerov_eigenvalue(SymmetricPotential::decadic(5.0), 0);
  const double e50 = oracle::numerov_eigenvalue(SymmetricPotential::decadic(50.0), 0);
  o.check(std::abs(quantum - 2.09) <= 0.02, fmt("quantum %.5f", quantum));
  o.check(std::abs(wkb - 1.22) <= 0.02, fmt("wkb %.5f", wkb));
  o.check(e5 < wkb && wkb < e50, fmt("wkb %.5f not in (%.5f, %.5f)", wkb, e5, e50));
  o.note(fmt("quantum %.5f, wkb %.5f", quantum, wkb) + fmt(", exact lambda=5/50: %.5f / %.5f", e5, e50));
  return o;
}

Outcome sextic_bc_sensitivity() {
  Outcome o;
  const auto s = SymmetricPotential::homogeneous(6);
  const double e = 10.8571;
  const double p0 = std::sqrt(2.0 * e);
  const auto series_bc = semiclassical::bc_series(s, e, 10);
  const double rel = std::abs(series_bc.value - p0) / p0;
  o.check(rel < 3e-5, fmt("|bc - p(0)|/p(0) = %.3g", rel));

  const double t2 = model::turning_point(s, e).t2;
  const auto crude = qlm::solve_phase(s, e, BcMethod::wkb_p0);
  const auto series = qlm::solve_phase(s, e, BcMethod::asymptotic_series);
  collect(crude, s);
  collect(series, s);
  const int n_crude = qlm::count_extrema(qlm::amplitude_derivative(crude, 6, t2).values);
  const int n_series = qlm::count_extrema(qlm::amplitude_derivative(series, 6, t2).values);
  o.check(n_crude >= 2 && n_crude > n_series,
          fmt("6th-derivative extrema: p(0) %.0f, series %.0f", n_crude, n_series));
  o.note(fmt("rel diff %.3g (order %.0f)", rel, series_bc.order_used) +
         fmt(", 6th-derivative extrema p(0) %.0f vs series %.0f", n_crude, n_series));
  return o;
}

Outcome property_suite() {
  Outcome o;
  const auto q = SymmetricPotential::homogeneous(4);
  const auto s = SymmetricPotential::homogeneous(6);
  const auto oct = SymmetricPotential::homogeneous(8);

  // Ñ strictly increasing on every sweep
  std::vector<spectrum::SpectrumTable> sweeps;
  for (const char* potential : {"4:0.5", "6:0.5", "8:0.5"}) sweeps.push_back(wide_sweep(potential));
  auto opts = default_options();
  opts.refine_eigenvalues = false;
  for (const double lambda : {0.001, 1.0, 1000.0}) {
    sweeps.push_back(spectrum::oscillation_number_sweep(SymmetricPotential::decadic(lambda), 0.5, 12.0, 24, opts));
    collect(sweeps.back());
  }
  opts.bc_method = BcMethod::harmonic_exact;
  sweeps.push_back(spectrum::oscillation_number_sweep(SymmetricPotential::harmonic(), 0.1, 5.5, 28, opts));
  collect(sweeps.back());
  for (const auto& t : sweeps) {
    for (std::size_t i = 1; i < t.ntilde.size(); ++i) {
      if (t.failed[i] || t.failed[i - 1]) continue;
      o.check(t.ntilde[i] > t.ntilde[i - 1], t.potential + ": Ntilde not increasing at E=" + fmt("%.4g", t.energies[i]));
    }
  }

  // BC independence of eigenvalues
  auto crude = default_options();
  crude.bc_method = BcMethod::wkb_p0;
  double bc_worst = 0.0;
  for (const auto& [v, n] : {std::pair{q, 0}, std::pair{q, 1}, std::pair{q, 4}, std::pair{s, 0}, std::pair{oct, 2}}) {
    const double a = spectrum::eigenvalue(v, n, 1e-12, default_options());
    const double b = spectrum::eigenvalue(v, n, 1e-12, crude);
    bc_worst = std::max(bc_worst, std::abs(a - b) / std::max(1.0, a));
  }
  o.check(bc_worst < 1e-9, fmt("BC dependence %.3g", bc_worst));

  // QLM convergence from trial_airy
  int worst_iter = 0;
  double worst_update = 0.0;
  for (const auto& [v, e] : {std::pair{q, 0.53}, std::pair{q, 40.0}, std::pair{s, 10.8571}, std::pair{oct, 3.0},
                             std::pair{oct, 150.0}}) {
    const auto sol = qlm::solve_phase(v, e, BcMethod::asymptotic_series);
    collect(sol, v);
    worst_iter = std::max(worst_iter, sol.iterations);
    worst_update = std::max(worst_update, sol.final_update_norm);
  }
  o.check(worst_iter <= 10 && worst_update < 1e-12,
          fmt("QLM: %.0f iterations, final update %.3g", worst_iter, worst_update));

  // eigenfunctions against Numerov
  double l2_worst = 0.0;
  for (const auto& [v, n] : {std::pair{q, 0}, std::pair{q, 1}, std::pair{q, 3}, std::pair{oct, 0}, std::pair{oct, 2}}) {
    const double e = spectrum::eigenvalue(v, n, 1e-12, default_options());
    const auto psi = spectrum::eigenfunction(v, e);
    const double en = oracle::numerov_eigenvalue(v, n);
    const auto ref = oracle::numerov_wavefunction(v, en, oracle::parity_of_level(n));
    l2_worst = std::max(l2_worst, spectrum::relative_l2_difference(psi, ref.x, ref.psi));
    o.check(oracle::count_nodes(psi.psi) == n, fmt("level %.0f has the wrong node count", n));
  }
  o.check(l2_worst < 1e-6, fmt("eigenfunction L2 difference %.3g", l2_worst));

  // Dunham contour invariance
  semiclassical::ContourOptions thin;
  thin.semi_minor_factor = 0.3;
  semiclassical::ContourOptions fat;
  fat.semi_minor_factor = 0.7;
  double contour_worst = 0.0;
  for (const auto& [v, n] : {std::pair{q, 0}, std::pair{q, 3}, std::pair{s, 1}}) {
    const double a = semiclassical::dunham_quantize(v, n, 3, semiclassical::Terminant::stieltjes_half, thin);
    const double b = semiclassical::dunham_quantize(v, n, 3, semiclassical::Terminant::stieltjes_half, fat);
    contour_worst = std::max(contour_worst, std::abs(a - b) / std::max(1.0, a));
  }
  o.check(contour_worst < 1e-9, fmt("contour dependence %.3g", contour_worst));

  // exact back-substitution of the recursion
  std::vector<diffalg::JetExpression> terms;
  for (int k = 0; k <= 8; ++k) terms.push_back(diffalg::riccati_term(k));
  bool exact = true;
  for (int k = 1; k <= 8; ++k) exact = exact && diffalg::riccati_residual(terms, k).is_zero();
  o.check(exact, "recursion residual not exactly zero for some k <= 8");

  // Milne residual over everything solved so far
  const double milne_worst = *std::max_element(shared().milne.begin(), shared().milne.end());
  o.check(milne_worst < 1e-8, fmt("Milne residual %.3g", milne_worst));

  o.note(fmt("%.0f sweeps increasing; BC %.2g; QLM <= %.0f iterations", sweeps.size(), bc_worst, worst_iter));
  o.note(fmt("L2 %.2g; contour %.2g", l2_worst, contour_worst) +
         fmt("; Milne max %.2g over %.0f solutions", milne_worst, shared().milne.size()));
  return o;
}

Outcome oscillation_number_shape() {
  Outcome o;
  const std::vector<std::string> potentials = {"4:0.5", "6:0.5", "8:0.5"};
  std::vector<double> at220;
  std::string counts;
  double worst = 0.0;
  for (const auto& potential : potentials) {
    const auto& t = wide_sweep(potential);
    at220.push_back(t.ntilde.back());
    const auto v = SymmetricPotential::parse(potential);
    std::vector<double> oracle_levels;
    for (int n = 0;; ++n) {
      const double e = oracle::numerov_eigenvalue(v, n);
      if (e >= 220.0) break;
      oracle_levels.push_back(e);
    }
    o.check(t.eigenvalues.size() == oracle_levels.size(),
            potential + fmt(": %.0f crossings vs %.0f oracle levels", t.eigenvalues.size(), oracle_levels.size()));
    for (std::size_t k = 0; k < std::min(t.eigenvalues.size(), oracle_levels.size()); ++k) {
      o.check(t.eigenvalues[k].n == static_cast<int>(k), potential + fmt(": crossing %.0f out of order", k));
      worst = std::max(worst, std::abs(t.eigenvalues[k].energy - oracle_levels[k]) / oracle_levels[k]);
    }
    counts += (counts.empty() ? "" : "/") + std::to_string(oracle_levels.size());
  }
  o.check(at220[0] > at220[1] && at220[1] > at220[2],
          fmt("Ntilde(220) ordering %.4f, %.4f, %.4f", at220[0], at220[1], at220[2]));
  o.check(worst < 1e-6, fmt("worst relative mismatch %.3g", worst));
  o.note(fmt("Ntilde(220) = %.3f > %.3f > %.3f", at220[0], at220[1], at220[2]) + "; levels " + counts +
         fmt("; worst mismatch %.2g", worst));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"harmonic exactness", harmonic_exactness},
      {"optimal phase", optimal_phase},
      {"quartic ladder", quartic_ladder},
      {"octic errors", octic_errors},
      {"decadic strong coupling", decadic_strong_coupling},
      {"sextic boundary value", sextic_bc_sensitivity},
      {"property suite", property_suite},
      {"oscillation-number shape", oscillation_number_shape},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome r;
    const auto start = std::chrono::steady_clock::now();
    try {
      r = run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-26s %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += r.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
