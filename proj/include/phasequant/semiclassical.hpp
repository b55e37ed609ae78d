#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "phasequant/model.hpp"

namespace phasequant::semiclassical {

using model::SymmetricPotential;

/// First-order (WKB) quantization: S(t2) − S(t1) = πħ(n + 1/2).
double wkb_quantize(const SymmetricPotential& v, int n);

/// N^sc(E) = (S(t2) − S(t1))/(πħ) + 1/2; equals n + 1 at WKB levels.
double nsc(const SymmetricPotential& v, double energy);

struct ContourOptions {
  double semi_minor_factor = 0.5;  // b = factor·t2; semi-major a = t2 + b
  int min_nodes = 256;
  int max_nodes = 1 << 15;
  double rel_tol = 1e-13;
};

/// ∮ ζ′₂ₖ dz on a clockwise ellipse around [t1, t2], trapezoid rule in the
/// angle, with P followed continuously from the cut sheet. k = 0 gives
/// 2∫_{t1}^{t2} p dx; k ≥ 1 are the higher Dunham corrections.
std::complex<double> dunham_integral(const SymmetricPotential& v, double energy, int k,
                                     const ContourOptions& options = {});

enum class Terminant { none, stieltjes_half };

/// Solves Σ_{k<k_max} (iħ)^{2k} ∮ζ′₂ₖ = 2πħ(n + 1/2) for E. k_max counts the
/// retained terms, so k_max = 1 is WKB; with stieltjes_half the last retained
/// term is halved when there are at least two.
double dunham_quantize(const SymmetricPotential& v, int n, int k_max, Terminant terminant,
                       const ContourOptions& options = {});

/// Airy-carrier first-order phase argument on the half line x ≥ 0, measured
/// from t2: −(3/2 ∫_x^{t2} p/ħ)^{2/3} inside, +(3/2 ∫_{t2}^x |p|/ħ)^{2/3} outside.
double airy_xi0(const SymmetricPotential& v, double energy, double x);

/// Uniform (Airy-carrier) semiclassical phase on a grid of x ≥ 0.
///
/// `sigma_sc` uses the symmetric-half convention σ(x) = σ(∞) − σ(−x): it is
/// nondecreasing along the grid, equals total/2 at x = 0 and tends to
/// `total` = 2·arctan(Ai/Bi)|_{ξ₀(0)} as x → ∞. The mirror value at t1 is π/6.
struct UniformPhase {
  std::vector<double> grid;
  std::vector<double> xi0;
  std::vector<double> sigma_sc;
  std::vector<double> dsigma_sc;
  std::vector<double> log_dsigma_sc;  // ln ∂σ^sc, finite where dsigma underflows
  double energy = 0.0;
  double total = 0.0;
};

UniformPhase airy_uniform_phase(const SymmetricPotential& v, double energy,
                                const std::vector<double>& grid);

/// Columns x, xi0, sigma_sc, dsigma_sc.
void write_csv(std::ostream& os, const UniformPhase& phase);

/// Solves arctan(Ai[ξ₀(0)]/Bi[ξ₀(0)]) = (n + 1)π/2 on the unwrapped branch.
double airy_quantize(const SymmetricPotential& v, int n);

enum class BcMethod { wkb_p0, asymptotic_series, harmonic_exact };

std::string_view to_string(BcMethod method);
BcMethod bc_method_from_string(std::string_view text);

/// Real boundary value ∂ₓσ(0) of the quantum phase and how it was obtained.
struct BoundaryCondition {
  double value = 0.0;
  int order_used = 0;
  BcMethod method = BcMethod::wkb_p0;
  std::vector<double> terms;  // ∂ₓσ₂ₖ(0)ħ^{2k}, k = 0..order_used, unhalved
};

/// ∂ₓσ(0) = Σ ∂ₓσ₂ₖ(0)ħ^{2k}, truncated before the first term that grows in
/// magnitude (capped at k_cap) with the last kept term halved when k ≥ 1.
BoundaryCondition bc_series(const SymmetricPotential& v, double energy, int k_cap);

/// σ^sc(x; I, c) from cot σ = cot(S + φ) − [cot(S(t2) + 2φ) + 2Ic], on the
/// branch continuous in S.
double sc_phase_ambiguity(double s_x, double phi, double s_t2, double invariant_i, double c);

struct ErmakovParameters {
  double invariant_i;
  double c;
  double wronskian_w;
};

}  // namespace phasequant::semiclassical
