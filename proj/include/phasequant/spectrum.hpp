#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phasequant/model.hpp"
#include "phasequant/qlm.hpp"

namespace phasequant::spectrum {

using model::SymmetricPotential;
using semiclassical::BcMethod;

struct Level {
  int n = 0;
  double energy = 0.0;
};

/// Ñ(E) = σ(∞, E)/π on an energy grid plus the refined integer crossings.
struct SpectrumTable {
  std::string potential;
  double hbar = 1.0;
  BcMethod bc_method = BcMethod::asymptotic_series;
  std::optional<double> lambda;
  std::string source = "qlm";
  std::vector<double> energies;
  std::vector<double> ntilde;       // NaN where the node failed
  std::vector<bool> failed;
  std::vector<int> iterations;
  std::vector<double> residuals;    // Milne residual per node
  std::vector<double> nsc;          // N^sc(E), only when requested
  std::vector<Level> eigenvalues;
};

struct SweepOptions {
  BcMethod bc_method = BcMethod::asymptotic_series;
  int k_cap = 10;
  qlm::GridOptions grid;
  qlm::SolveOptions solve;
  int jobs = 1;                    // 1: warm-started chain; > 1: parallel cold starts
  bool refine_eigenvalues = true;
  double eigen_tol = 1e-12;        // relative |ΔE|
  bool with_semiclassical = false;
};

/// One QLM solve at E; `warm` (if given) replaces trial_airy as the start.
qlm::PhaseSolution solve_at(const SymmetricPotential& v, double energy, const SweepOptions& options,
                            const qlm::RiccatiField* warm = nullptr);

inline double ntilde_of(const qlm::PhaseSolution& sol) { return sol.total / 3.14159265358979323846; }

/// Ñ on `samples` equally spaced energies in [e_min, e_max]; failed nodes are
/// marked, more than 10% failures throws NoConvergence.
SpectrumTable oscillation_number_sweep(const SymmetricPotential& v, double e_min, double e_max,
                                       int samples, const SweepOptions& options = {});

/// Monotone cubic (PCHIP) interpolant through the successful nodes.
double interpolate_ntilde(const SpectrumTable& table, double energy);

/// Inverse of the interpolant at Ñ = target (no fresh solves).
double interpolated_crossing(const SpectrumTable& table, double target);

/// Solves Ñ(E) = n + 1 inside [lo, hi] by Illinois regula falsi with fresh solves.
double refine_level(const SymmetricPotential& v, int n, double lo, double hi,
                    const SweepOptions& options);

/// E_n: bracket from the Airy-carrier estimate, then refine to `tol`.
double eigenvalue(const SymmetricPotential& v, int n, double tol = 1e-12,
                  const SweepOptions& options = {});

struct Wavefunction {
  std::vector<double> x;
  std::vector<double> psi;
  int n = 0;
};

/// ψ = α sin σ on [−x_max, x_max], parity-extended and L²-normalized; the sign
/// makes ψ(0) > 0 (even n) or ψ′(0) > 0 (odd n).
Wavefunction eigenfunction(const SymmetricPotential& v, double energy,
                           const SweepOptions& options = {});

/// √(∫(a − b)²)/√(∫b²) after interpolating `a` onto the abscissas of `b`.
double relative_l2_difference(const Wavefunction& a, const std::vector<double>& bx,
                              const std::vector<double>& by);

/// One sweep per λ on V = x²/2 + λx¹⁰/2.
std::vector<SpectrumTable> lambda_sweep(const std::vector<double>& lambdas, double e_min,
                                        double e_max, int samples,
                                        const SweepOptions& options = {});

}  // namespace phasequant::spectrum
