#pragma once

#include <vector>

#include "phasequant/model.hpp"
#include "phasequant/semiclassical.hpp"

namespace phasequant::oracle {

using model::SymmetricPotential;

// Harmonic oscillator V = x²/2 with E = ν + 1/2 (Weber equation).

/// D_ν(0) = 2^{ν/2} π^{1/4} / (Γ(1/2 − ν/2) Γ(1 + ν)^{1/2}); exactly 0 at odd ν
/// where Γ(1/2 − ν/2) has a pole. Needs ν > −1.
double weber_at_origin(double nu);

/// Optimal boundary value ∂ₓσ(0) = 2νΓ(ν/2) / ((ν − 1)Γ(ν/2 − 1/2)),
/// evaluated as 2Γ(ν/2 + 1)/Γ((ν + 1)/2) so ν = 0, 1 need no limits.
double harmonic_bc(double nu);

/// W[D_ν(z), D_ν(−z)] = 2π⁻¹ sin πν.
double harmonic_wronskian(double nu);

/// N(E) = ν + 1 = E + 1/2.
inline double harmonic_oscillation_number(double nu) { return nu + 1.0; }

/// I = π⁻¹, c = −cot(πν)/(2I). `wronskian_w` is oriented as W[ψ₁, ψ₂] so that
/// W/I = 2 sin πN (the class relation); it is −harmonic_wronskian(ν).
semiclassical::ErmakovParameters harmonic_optimal_params(double nu);

enum class Parity { even, odd };

inline Parity parity_of_level(int n) { return n % 2 == 0 ? Parity::even : Parity::odd; }

struct NumerovOptions {
  double phase_step = 0.02;      // h · max k
  double tail_action = 30.0;     // forbidden action ∫|p|/ħ up to L
  double rel_tol = 1e-11;
  bool richardson = true;
};

/// Level-n eigenvalue by parity-aware Numerov shooting on [0, L] with
/// node-count bisection; h and h/2 combined by Richardson extrapolation.
double numerov_eigenvalue(const SymmetricPotential& v, int n, const NumerovOptions& options = {});

/// Energy of the last bisection at a single step size (no extrapolation).
double numerov_eigenvalue_at_step(const SymmetricPotential& v, int n, double h, double length);

/// Box length L used for level energies up to `energy`.
double numerov_box_length(const SymmetricPotential& v, double energy,
                          const NumerovOptions& options = {});

struct HalfLineSolution {
  std::vector<double> x;
  std::vector<double> psi;
  double h = 0.0;
};

/// Raw Numerov solution on [0, L] with the parity start (even: ψ(0)=1, ψ′(0)=0;
/// odd: ψ(0)=0, ψ′(0)=1). Not renormalized, so keep L moderate.
HalfLineSolution numerov_solution(const SymmetricPotential& v, double energy, Parity parity,
                                  double h, double length);

struct Wavefunction {
  std::vector<double> x;
  std::vector<double> psi;
};

/// L²-normalized eigenfunction on [−L, L] by parity extension. The half-line
/// solution is shot outward from 0 and inward from L and matched at t2.
Wavefunction numerov_wavefunction(const SymmetricPotential& v, double energy, Parity parity,
                                  const NumerovOptions& options = {});

int count_nodes(const std::vector<double>& psi);

}  // namespace phasequant::oracle
