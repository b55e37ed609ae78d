#include "phasequant/qlm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "phasequant/error.hpp"
#include "phasequant/oracle.hpp"

namespace phasequant::qlm {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// 3-stage Gauss-Legendre (order 6).
const double kS15 = std::sqrt(15.0);
const double kC[3] = {0.5 - kS15 / 10.0, 0.5, 0.5 + kS15 / 10.0};
const double kA[3][3] = {
    {5.0 / 36.0, 2.0 / 9.0 - kS15 / 15.0, 5.0 / 36.0 - kS15 / 30.0},
    {5.0 / 36.0 + kS15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - kS15 / 24.0},
    {5.0 / 36.0 + kS15 / 30.0, 2.0 / 9.0 + kS15 / 15.0, 5.0 / 36.0},
};
const double kB[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};

double k_sq(const SymmetricPotential& v, double energy, double x) {
  return model::momentum_sq(v, energy, x) / (v.hbar() * v.hbar());
}

// 6-point Lagrange interpolation of node values at x on a uniform grid.
template <typename T>
T lagrange6(const std::vector<double>& grid, const std::vector<T>& values, double x) {
  const std::size_t n = grid.size();
  if (n < 6) {
    // Short grids: linear.
    const double h = grid[1] - grid[0];
    std::size_t i = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::max(0.0, (x - grid[0]) / h)));
    const double t = (x - grid[i]) / h;
    return values[i] * (1.0 - t) + values[i + 1] * t;
  }
  const double h = grid[1] - grid[0];
  const long centre = static_cast<long>(std::floor((x - grid[0]) / h));
  const long first = std::clamp<long>(centre - 2, 0, static_cast<long>(n) - 6);
  T sum{};
  for (long j = first; j < first + 6; ++j) {
    double w = 1.0;
    for (long m = first; m < first + 6; ++m) {
      if (m != j) w *= (x - grid[m]) / (grid[j] - grid[m]);
    }
    sum += values[j] * w;
  }
  return sum;
}

std::vector<cd> stages_from_nodes(const RiccatiField& f) {
  const std::size_t cells = f.grid.size() - 1;
  std::vector<cd> out(3 * cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double h = f.grid[i + 1] - f.grid[i];
    for (int j = 0; j < 3; ++j) out[3 * i + j] = lagrange6(f.grid, f.values, f.grid[i] + kC[j] * h);
  }
  return out;
}

// 4th-order first derivative on a uniform grid, one-sided near the right edge.
// The left edge is x = 0 and y is even there, so mirrored values are used.
std::vector<double> derivative4(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 5) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = i + 1 < n ? i + 1 : n - 1;
      d[i] = b > a ? (y[b] - y[a]) / ((b - a) * h) : 0.0;
    }
    return d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 2 < n) {
      const double ym2 = i >= 2 ? y[i - 2] : y[2 - i];
      const double ym1 = i >= 1 ? y[i - 1] : y[1];
      d[i] = (ym2 - 8.0 * ym1 + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
    } else {
      d[i] = (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) /
             (12.0 * h);
    }
  }
  return d;
}

double update_norm(const std::vector<cd>& a, const std::vector<cd>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i])));
  }
  return worst;
}

// One Newton (QLM) step: collocation of M′ = −2iM_prev·M + i(k² + M_prev²).
void linear_sweep(const std::vector<double>& grid, const std::vector<double>& k2_stage,
                  const std::vector<cd>& prev_stage, cd m0, std::vector<cd>& nodes,
                  std::vector<cd>& stages) {
  const std::size_t cells = grid.size() - 1;
  nodes.assign(grid.size(), cd{});
  stages.assign(3 * cells, cd{});
  nodes[0] = m0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double h = grid[i + 1] - grid[i];
    cd a[3];
    cd b[3];
    for (int j = 0; j < 3; ++j) {
      const cd mp = prev_stage[3 * i + j];
      a[j] = -2.0 * kI * mp;
      b[j] = kI * (k2_stage[3 * i + j] + mp * mp);
    }
    Eigen::Matrix3cd lhs;
    Eigen::Vector3cd rhs;
    for (int j = 0; j < 3; ++j) {
      rhs(j) = nodes[i];
      for (int l = 0; l < 3; ++l) {
        lhs(j, l) = (j == l ? 1.0 : 0.0) - h * kA[j][l] * a[l];
        rhs(j) += h * kA[j][l] * b[l];
      }
    }
    const Eigen::Vector3cd y = lhs.partialPivLu().solve(rhs);
    cd next = nodes[i];
    for (int l = 0; l < 3; ++l) {
      stages[3 * i + l] = y(l);
      next += h * kB[l] * (a[l] * y(l) + b[l]);
    }
    nodes[i + 1] = next;
  }
}

bool all_finite(const std::vector<cd>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](cd z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

}  // namespace

std::vector<double> make_grid(const SymmetricPotential& v, double energy,
                              const GridOptions& options) {
  if (!(energy > 0.0)) throw Error(ErrorKind::NonPositiveEnergy, "energy must be positive");
  const double hbar = v.hbar();
  const double t2 = model::turning_point(v, energy).t2;
  const double cap = model::forbidden_action_point(v, energy, options.cap_action * hbar);
  double x_max = std::max(options.xmax_factor * t2,
                          model::forbidden_action_point(v, energy, options.tail_action * hbar));
  x_max = std::min(x_max, cap);
  int cells = options.grid_points > 1 ? options.grid_points - 1 : 0;
  if (cells == 0) {
    const double k_max = std::sqrt(std::max(std::abs(k_sq(v, energy, 0.0)),
                                            std::abs(k_sq(v, energy, x_max))));
    cells = std::max(64, static_cast<int>(std::ceil(x_max * k_max / options.phase_step)));
  }
  std::vector<double> grid(cells + 1);
  for (int i = 0; i <= cells; ++i) grid[i] = x_max * i / cells;
  return grid;
}

RiccatiField trial_airy(const SymmetricPotential& v, double energy, const std::vector<double>& grid) {
  const auto phase = semiclassical::airy_uniform_phase(v, energy, grid);
  const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  const auto dlog = derivative4(phase.log_dsigma_sc, h);
  RiccatiField f;
  f.grid = grid;
  f.energy = energy;
  f.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f.values[i] = cd(phase.dsigma_sc[i], 0.5 * dlog[i]);
  }
  return f;
}

RiccatiField trial_step(const SymmetricPotential& v, double energy, const std::vector<double>& grid) {
  const double t2 = model::turning_point(v, energy).t2;
  const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  const double half_width = 1.5 * h;
  RiccatiField f;
  f.grid = grid;
  f.energy = energy;
  f.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = std::sqrt(std::abs(k_sq(v, energy, grid[i])));
    const cd inside{k, 0.0};
    const cd outside{0.0, -k};
    const double w = std::clamp((grid[i] - (t2 - half_width)) / (2.0 * half_width), 0.0, 1.0);
    f.values[i] = (1.0 - w) * inside + w * outside;
  }
  return f;
}

RiccatiField resample(const SymmetricPotential& v, const RiccatiField& field,
                      const std::vector<double>& grid, double energy) {
  RiccatiField f;
  f.grid = grid;
  f.energy = energy;
  f.values.resize(grid.size());
  const double end = field.grid.back();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= end) {
      f.values[i] = lagrange6(field.grid, field.values, grid[i]);
    } else {
      f.values[i] = cd(0.0, -std::sqrt(std::abs(k_sq(v, energy, grid[i]))));
    }
  }
  return f;
}

BoundaryCondition make_boundary_condition(const SymmetricPotential& v, double energy,
                                          BcMethod method, int k_cap) {
  if (!(energy > 0.0)) throw Error(ErrorKind::ZeroMomentumAtOrigin, "p(0) vanishes for E <= 0");
  switch (method) {
    case BcMethod::wkb_p0: {
      BoundaryCondition bc;
      bc.value = std::sqrt(model::momentum_sq(v, energy, 0.0));
      bc.method = BcMethod::wkb_p0;
      bc.terms = {bc.value};
      return bc;
    }
    case BcMethod::asymptotic_series:
      return semiclassical::bc_series(v, energy, k_cap);
    case BcMethod::harmonic_exact: {
      if (!v.is_unit_harmonic()) {
        throw Error(ErrorKind::InvalidArgument, "harmonic BC needs V = x^2/2");
      }
      // x = √ħ·y maps onto the unit oscillator with ν = E/ħ − 1/2.
      const double hbar = v.hbar();
      BoundaryCondition bc;
      bc.value = std::sqrt(hbar) * oracle::harmonic_bc(energy / hbar - 0.5);
      bc.method = BcMethod::harmonic_exact;
      bc.terms = {bc.value};
      return bc;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown boundary condition method");
}

PhaseSolution qlm_solve(const SymmetricPotential& v, double energy, const RiccatiField& m0,
                        const BoundaryCondition& bc, const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  if (!(bc.value > 0.0)) throw Error(ErrorKind::InvalidArgument, "boundary value must be positive");
  const auto& grid = m0.grid;
  if (grid.size() < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least two nodes");
  const std::size_t cells = grid.size() - 1;
  const double hbar = v.hbar();

  std::vector<double> k2_stage(3 * cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double h = grid[i + 1] - grid[i];
    for (int j = 0; j < 3; ++j) k2_stage[3 * i + j] = k_sq(v, energy, grid[i] + kC[j] * h);
  }

  std::vector<cd> prev_stage = m0.stages.size() == 3 * cells ? m0.stages : stages_from_nodes(m0);
  std::vector<cd> prev_nodes = m0.values;
  std::vector<cd> nodes;
  std::vector<cd> stages;
  const cd start{bc.value / hbar, 0.0};

  PhaseSolution sol;
  sol.energy = energy;
  sol.bc = bc;
  bool converged = false;
  for (int q = 1; q <= options.max_iter; ++q) {
    linear_sweep(grid, k2_stage, prev_stage, start, nodes, stages);
    if (!all_finite(nodes) || !all_finite(stages)) {
      throw Error(ErrorKind::NoConvergence, "QLM iterate is not finite");
    }
    const double u = std::max(update_norm(nodes, prev_nodes), update_norm(stages, prev_stage));
    sol.update_norms.push_back(u);
    sol.iterations = q;
    sol.final_update_norm = u;
    prev_nodes.swap(nodes);
    prev_stage.swap(stages);
    if (u < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::NoConvergence, "QLM did not reach the tolerance within max_iter");
  }

  sol.field.grid = grid;
  sol.field.values = prev_nodes;
  sol.field.stages = prev_stage;
  sol.field.energy = energy;
  sol.grid = grid;

  // ∂σ from (ln Re M)′ = 2 Im M; Re M itself sinks below round-off deep in the
  // forbidden region.
  const std::size_t n = grid.size();
  std::vector<double> log_ds(n);
  log_ds[0] = std::log(bc.value / hbar);
  for (std::size_t i = 0; i < cells; ++i) {
    const double h = grid[i + 1] - grid[i];
    double integral = 0.0;
    for (int j = 0; j < 3; ++j) integral += h * kB[j] * prev_stage[3 * i + j].imag();
    log_ds[i + 1] = log_ds[i] + 2.0 * integral;
  }
  sol.dsigma.resize(n);
  sol.alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.dsigma[i] = std::exp(log_ds[i]);
    sol.alpha[i] = std::exp(-0.5 * (log_ds[i] + std::log(hbar)));
  }

  const double scale = bc.value / hbar;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.dsigma[i] > 1e-8 * scale && !(prev_nodes[i].real() > 0.0)) {
      throw Error(ErrorKind::NonPositivePhaseDerivative, "Re M <= 0 where it is resolvable");
    }
  }

  // Cumulative ∫∂σ: Gauss stages where Re M is resolved, exact exponential
  // (log-mean) rule in the deep tail.
  std::vector<double> cumulative(n, 0.0);
  std::vector<double> cell_integral(cells, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    const double h = grid[i + 1] - grid[i];
    double cell = 0.0;
    if (sol.dsigma[i] > 1e-10 * scale) {
      for (int j = 0; j < 3; ++j) cell += h * kB[j] * prev_stage[3 * i + j].real();
    } else {
      const double d0 = sol.dsigma[i];
      const double d1 = sol.dsigma[i + 1];
      const double dl = log_ds[i] - log_ds[i + 1];
      cell = std::abs(dl) < 1e-12 ? h * d0 : h * (d0 - d1) / dl;
    }
    cell_integral[i] = std::max(cell, 0.0);
    cumulative[i + 1] = cumulative[i] + cell_integral[i];
  }
  const double x_max = grid.back();
  const double k_end = std::sqrt(std::abs(k_sq(v, energy, x_max)));
  sol.tail = sol.dsigma.back() / (2.0 * std::max(k_end, 1e-300));
  if (sol.tail > std::max(options.tol, 1e-10) * std::max(1.0, cumulative.back())) {
    throw Error(ErrorKind::TailTooLarge, "phase still accumulating at x_max");
  }
  sol.total = 2.0 * (cumulative.back() + sol.tail);
  sol.remaining.resize(n);
  sol.remaining[n - 1] = sol.tail;
  for (std::size_t r = 1; r < n; ++r) {
    const std::size_t i = n - 1 - r;
    sol.remaining[i] = sol.remaining[i + 1] + cell_integral[i];
  }
  sol.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.sigma[i] = 0.5 * sol.total + cumulative[i];
  return sol;
}

double milne_residual(const std::vector<double>& grid, const std::vector<double>& alpha,
                      const SymmetricPotential& v, double energy) {
  const std::size_t n = grid.size();
  if (n < 5) return 0.0;
  const double h = grid[1] - grid[0];
  const double hbar = v.hbar();
  const double hbar2 = hbar * hbar;
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    // Stencil spacing follows the shortest local scale of p² and its first
    // four derivatives (wavelength, Airy scale near t2, steep walls), so the
    // second difference is neither swamped by round-off on fine grids nor
    // truncated where a high power bends the potential.
    const double p2 = model::momentum_sq(v, energy, grid[i]);
    double k_local = std::sqrt(std::abs(p2)) / hbar;
    for (int m = 1; m <= 4; ++m) {
      const double qm = std::abs(v.q_derivative(energy, grid[i], m)) / hbar2;
      k_local = std::max(k_local, std::pow(qm, 1.0 / (m + 2)));
    }
    std::size_t s = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.005 / (h * k_local))));
    s = std::min({s, i / 2, (n - 1 - i) / 2});
    if (s == 0) continue;
    const double hs = h * static_cast<double>(s);
    const double a = alpha[i];
    const double dd = (-alpha[i - 2 * s] + 16.0 * alpha[i - s] - 30.0 * a + 16.0 * alpha[i + s] -
                       alpha[i + 2 * s]) /
                      (12.0 * hs * hs);
    const double r = std::abs(hbar2 * dd + p2 * a - 1.0 / (a * a * a)) /
                     ((1.0 + std::abs(p2)) * std::max(1.0, a));
    worst = std::max(worst, r);
  }
  return worst;
}

double milne_residual(const PhaseSolution& sol, const SymmetricPotential& v) {
  return milne_residual(sol.grid, sol.alpha, v, sol.energy);
}

DerivativeSamples amplitude_derivative(const PhaseSolution& sol, int order, double x_end,
                                       double spacing) {
  if (order < 1 || sol.grid.size() < 2) throw Error(ErrorKind::InvalidArgument, "bad derivative request");
  const double h = sol.grid[1] - sol.grid[0];
  const long stride = std::max(1L, std::lround(spacing / h));
  const double hs = h * static_cast<double>(stride);
  // Binomial weights of the n-th difference; odd orders are centred on a half step.
  std::vector<double> weight(order + 1);
  double binom = 1.0;
  for (int j = 0; j <= order; ++j) {
    weight[j] = ((order - j) % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (order - j) / (j + 1);
  }
  DerivativeSamples out;
  const long n = static_cast<long>(sol.grid.size());
  for (long first = 0; first + order * stride < n; first += stride) {
    const double x = sol.grid[first] + 0.5 * order * hs;
    if (x <= 0.0) continue;
    if (x >= x_end) break;
    double d = 0.0;
    for (int j = 0; j <= order; ++j) d += weight[j] * sol.alpha[first + j * stride];
    out.x.push_back(x);
    out.values.push_back(d / std::pow(hs, order));
  }
  return out;
}

int count_extrema(const std::vector<double>& values) {
  int count = 0;
  double previous = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double slope = values[i] - values[i - 1];
    if (slope == 0.0) continue;
    if (previous != 0.0 && (slope > 0.0) != (previous > 0.0)) ++count;
    previous = slope;
  }
  return count;
}

PhaseSolution solve_phase(const SymmetricPotential& v, double energy, BcMethod method,
                          const GridOptions& grid_options, const SolveOptions& options, int k_cap) {
  const auto grid = make_grid(v, energy, grid_options);
  const auto bc = make_boundary_condition(v, energy, method, k_cap);
  return qlm_solve(v, energy, trial_airy(v, energy, grid), bc, options);
}

void write_csv(std::ostream& os, const PhaseSolution& sol) {
  os << "x,sigma,dsigma,alpha,re_M,im_M\n";
  char line[256];
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", sol.grid[i],
                  sol.sigma[i], sol.dsigma[i], sol.alpha[i], sol.field.values[i].real(),
                  sol.field.values[i].imag());
    os << line;
  }
}

}  // namespace phasequant::qlm
