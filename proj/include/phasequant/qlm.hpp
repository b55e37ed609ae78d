#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "phasequant/model.hpp"
#include "phasequant/semiclassical.hpp"

namespace phasequant::qlm {

using model::SymmetricPotential;
using semiclassical::BcMethod;
using semiclassical::BoundaryCondition;

/// M(x) = ∂σ + (i/2)∂ ln ∂σ on a uniform half-line grid, in angle units
/// (M solves M′ = i(p²/ħ² − M²)). `stages` holds the three Gauss-Legendre stage
/// values per cell when known; trials leave it empty.
struct RiccatiField {
  std::vector<double> grid;
  std::vector<std::complex<double>> values;
  std::vector<std::complex<double>> stages;
  double energy = 0.0;
};

struct GridOptions {
  double phase_step = 0.02;   // h · max|p|/ħ
  int grid_points = 0;        // > 0 overrides phase_step
  double xmax_factor = 2.5;   // x_max ≥ factor·t2
  double tail_action = 18.0;  // forbidden action ∫|p|/ħ reached by x_max
  double cap_action = 40.0;   // hard cap on the forbidden action
};

std::vector<double> make_grid(const SymmetricPotential& v, double energy,
                              const GridOptions& options = {});

/// M₀ from the Airy-carrier uniform phase, with 4th-order finite differences.
RiccatiField trial_airy(const SymmetricPotential& v, double energy, const std::vector<double>& grid);

/// M₀ = |p|/ħ inside, −i|p|/ħ outside t2, linearly cross-faded over 3 cells.
RiccatiField trial_step(const SymmetricPotential& v, double energy, const std::vector<double>& grid);

/// Re-evaluates a field on another grid (6-point Lagrange); past the old
/// x_max the forbidden-region asymptote −i|p|/ħ is used.
RiccatiField resample(const SymmetricPotential& v, const RiccatiField& field,
                      const std::vector<double>& grid, double energy);

/// ∂σ(0) by the requested rule. harmonic_exact needs V = x²/2 and ħ = 1.
BoundaryCondition make_boundary_condition(const SymmetricPotential& v, double energy,
                                          BcMethod method, int k_cap = 10);

struct PhaseSolution {
  RiccatiField field;              // converged M with stage values
  std::vector<double> grid;
  std::vector<double> sigma;       // σ(x), σ(0) = total/2
  std::vector<double> dsigma;      // ∂σ = bc·exp(2∫Im M), positive
  std::vector<double> alpha;       // (ħ∂σ)^{-1/2}
  std::vector<double> remaining;   // ∫_x^∞ ∂σ, summed from the far end (exact in the tail)
  double energy = 0.0;
  double total = 0.0;              // σ(∞)
  double tail = 0.0;               // estimate of ∫_{x_max}^∞ ∂σ
  BoundaryCondition bc;
  int iterations = 0;
  double final_update_norm = 0.0;
  std::vector<double> update_norms;
};

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 30;
};

PhaseSolution qlm_solve(const SymmetricPotential& v, double energy, const RiccatiField& m0,
                        const BoundaryCondition& bc, const SolveOptions& options = {});

/// max over interior nodes of |ħ²α″ + p²α − α⁻³| / ((1 + |p²|)·max(1, α)).
double milne_residual(const PhaseSolution& sol, const SymmetricPotential& v);
double milne_residual(const std::vector<double>& grid, const std::vector<double>& alpha,
                      const SymmetricPotential& v, double energy);

struct DerivativeSamples {
  std::vector<double> x;
  std::vector<double> values;
};

/// ∂ⁿα by the central n-th difference with spacing ≈ `spacing` (a multiple of
/// the grid step), sampled on (0, x_end).
DerivativeSamples amplitude_derivative(const PhaseSolution& sol, int order, double x_end,
                                       double spacing = 0.04);

/// Local extrema of a sampled curve (sign changes of its first difference).
int count_extrema(const std::vector<double>& values);

/// σ(∞) = 2(∫₀^{x_max} ∂σ + tail).
inline double total_phase(const PhaseSolution& sol) { return sol.total; }

/// Convenience: grid, trial_airy, BC and solve in one call.
PhaseSolution solve_phase(const SymmetricPotential& v, double energy, BcMethod method,
                          const GridOptions& grid_options = {}, const SolveOptions& options = {},
                          int k_cap = 10);

/// Columns x, sigma, dsigma, alpha, re_M, im_M.
void write_csv(std::ostream& os, const PhaseSolution& sol);

}  // namespace phasequant::qlm
