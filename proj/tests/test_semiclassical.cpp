#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "phasequant/error.hpp"
#include "phasequant/oracle.hpp"
#include "phasequant/semiclassical.hpp"
#include "phasequant/special.hpp"

using namespace phasequant;
using namespace phasequant::semiclassical;
using model::SymmetricPotential;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform(double x_max, int cells) {
  std::vector<double> g(cells + 1);
  for (int i = 0; i <= cells; ++i) g[i] = x_max * i / cells;
  return g;
}

}  // namespace

TEST_CASE("first-order quantization") {
  const auto h = SymmetricPotential::harmonic();
  for (int n = 0; n <= 20; ++n) CHECK(wkb_quantize(h, n) == doctest::Approx(n + 0.5).epsilon(1e-12));
  CHECK(wkb_quantize(SymmetricPotential::homogeneous(4), 0) == doctest::Approx(0.434).epsilon(5e-4 / 0.434));
  CHECK(wkb_quantize(SymmetricPotential::decadic(1000.0), 0) == doctest::Approx(1.22).epsilon(0.01 / 1.22));
}

TEST_CASE("semiclassical oscillation number") {
  const auto h = SymmetricPotential::harmonic();
  for (double e : {0.1, 0.5, 3.3}) CHECK(nsc(h, e) == doctest::Approx(e + 0.5).epsilon(1e-13));
  const auto q = SymmetricPotential::homogeneous(4);
  CHECK(nsc(q, wkb_quantize(q, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  double last = nsc(q, 0.05);
  for (double e = 0.1; e < 30.0; e *= 1.3) {
    CHECK(nsc(q, e) > last);
    last = nsc(q, e);
  }
}

TEST_CASE("Dunham integrals") {
  const auto h = SymmetricPotential::harmonic();
  CHECK(std::abs(dunham_integral(h, 0.5, 0) - kPi) < 1e-12);
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(dunham_integral(h, 0.5, k)) < 1e-10);
  const auto q = SymmetricPotential::homogeneous(4);
  const double e = 0.53;
  CHECK(dunham_integral(q, e, 0).real() == doctest::Approx(2 * model::classical_action(q, e, model::turning_point(q, e).t2)).epsilon(1e-12));
}

TEST_CASE("Dunham quantization") {
  const auto q = SymmetricPotential::homogeneous(4);
  CHECK(std::abs(dunham_quantize(q, 0, 3, Terminant::stieltjes_half) - 0.483) < 5e-4);
  CHECK(std::abs(dunham_quantize(q, 0, 2, Terminant::none) - 0.490) < 5e-4);
  CHECK(dunham_quantize(q, 0, 1, Terminant::none) == doctest::Approx(wkb_quantize(q, 0)).epsilon(1e-11));
  const auto h = SymmetricPotential::harmonic();
  for (int n : {0, 3}) {
    for (int k_max : {1, 2, 4}) {
      CHECK(std::abs(dunham_quantize(h, n, k_max, Terminant::stieltjes_half) - (n + 0.5)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(dunham_quantize(q, 0, 0, Terminant::none), Error);
}

TEST_CASE("Dunham quantization does not depend on the contour") {
  const auto q = SymmetricPotential::homogeneous(4);
  ContourOptions thin;
  thin.semi_minor_factor = 0.3;
  ContourOptions fat;
  fat.semi_minor_factor = 0.7;
  for (int n : {0, 2}) {
    const double a = dunham_quantize(q, n, 3, Terminant::stieltjes_half, thin);
    const double b = dunham_quantize(q, n, 3, Terminant::stieltjes_half, fat);
    CHECK(std::abs(a - b) < 1e-9 * std::max(1.0, a));
  }
}

TEST_CASE("Airy argument") {
  const auto h = SymmetricPotential::harmonic();
  const double t2 = model::turning_point(h, 0.5).t2;
  CHECK(airy_xi0(h, 0.5, t2) == doctest::Approx(0.0));
  CHECK(airy_xi0(h, 0.5, 0.0) == doctest::Approx(-std::pow(1.5 * kPi / 4, 2.0 / 3.0)).epsilon(1e-12));
  CHECK(airy_xi0(h, 0.5, 0.999 * t2) < 0.0);
  CHECK(airy_xi0(h, 0.5, 1.001 * t2) > 0.0);
  CHECK(airy_xi0(h, 0.5, 2.5) > airy_xi0(h, 0.5, 2.0));
}

TEST_CASE("Airy uniform phase") {
  const auto h = SymmetricPotential::harmonic();
  const double e = 0.5;
  const double t2 = model::turning_point(h, e).t2;
  const auto grid = uniform(4 * t2, 400);  // node 100 sits on t2
  const auto ph = airy_uniform_phase(h, e, grid);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(ph.sigma_sc[i] >= ph.sigma_sc[i - 1]);
  CHECK(ph.sigma_sc[0] == doctest::Approx(ph.total / 2).epsilon(1e-12));
  // mirror image of σ(t1) = π/6 at the left turning point
  CHECK(ph.sigma_sc[100] == doctest::Approx(ph.total - kPi / 6).epsilon(1e-12));
  // far tail: total − σ ≈ e^{−2ζ}/2 with ζ the forbidden action to x_max
  const double zeta = model::forbidden_action(h, e, grid.back());
  CHECK(ph.total - ph.sigma_sc.back() == doctest::Approx(0.5 * std::exp(-2 * zeta)).epsilon(0.05));
  CHECK(ph.total == doctest::Approx(2 * special::airy_phase(airy_xi0(h, e, 0.0))).epsilon(1e-13));
  std::ostringstream os;
  write_csv(os, ph);
  CHECK(os.str().rfind("x,xi0,sigma_sc,dsigma_sc\n", 0) == 0);
}

TEST_CASE("uniform phase approaches S + pi/4 with energy") {
  const auto h = SymmetricPotential::harmonic();
  double previous = 1.0;
  for (double e : {2.5, 9.5, 20.5}) {
    const double t2 = model::turning_point(h, e).t2;
    const auto grid = uniform(2 * t2, 800);
    const auto ph = airy_uniform_phase(h, e, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] > 0.5 * t2) break;
      const double s = model::classical_action(h, e, grid[i]);
      worst = std::max(worst, std::abs(ph.sigma_sc[i] - s - kPi / 4));
    }
    if (e == 9.5) CHECK(worst < 0.01);
    CHECK(worst < previous);
    previous = worst;
  }
}

TEST_CASE("Airy-carrier quantization") {
  CHECK(std::abs(airy_quantize(SymmetricPotential::homogeneous(4), 0) - 0.480) < 5e-4);
  // Harmonic: ξ₀(0) lands on the first zero b₁ of Bi, so E = 4|b₁|^{3/2}/(3π).
  const double b1 = -1.173713222709127925;
  CHECK(airy_quantize(SymmetricPotential::harmonic(), 0) ==
        doctest::Approx(4 * std::pow(-b1, 1.5) / (3 * kPi)).epsilon(1e-12));
  // the total uniform phase is (n+1)π at the quantized energy
  const auto s = SymmetricPotential::homogeneous(6);
  const double e = airy_quantize(s, 2);
  const double t2 = model::turning_point(s, e).t2;
  const auto ph = airy_uniform_phase(s, e, uniform(3 * t2, 300));
  CHECK(ph.total == doctest::Approx(3 * kPi).epsilon(1e-10));
}

TEST_CASE("boundary-condition series") {
  const auto h = SymmetricPotential::harmonic();
  const auto wkb = bc_series(h, 0.5, 0);
  CHECK(wkb.value == doctest::Approx(1.0));
  CHECK(wkb.order_used == 0);
  const auto ground = bc_series(h, 0.5, 10);
  CHECK(std::abs(ground.value - oracle::harmonic_bc(0.0)) < 5e-3);
  CHECK(ground.value > 0.0);
  const auto sextic = bc_series(SymmetricPotential::homogeneous(6), 10.8571, 10);
  const double p0 = std::sqrt(2 * 10.8571);
  CHECK(std::abs(sextic.value - p0) / p0 < 3e-5);
  CHECK(sextic.value != p0);
  CHECK_THROWS_AS(bc_series(h, 0.0, 3), Error);
  CHECK_THROWS_AS(bc_series(h, 1.0, 11), Error);
}

TEST_CASE("asymptotic signature of the series") {
  const auto q = SymmetricPotential::homogeneous(4);
  int previous = 0;
  for (double e : {0.5, 3.0, 20.0}) {
    const auto bc = bc_series(q, e, 10);
    INFO("E = " << e << " order " << bc.order_used);
    CHECK(bc.order_used >= previous);
    previous = bc.order_used;
    // the kept terms shrink after the leading one
    for (int k = 2; k <= bc.order_used; ++k) {
      if (bc.terms[k] != 0.0) CHECK(std::abs(bc.terms[k]) <= std::abs(bc.terms[k - 1]) + std::abs(bc.terms[k - 2]));
    }
  }
  CHECK(previous > bc_series(q, 0.5, 10).order_used);
}

TEST_CASE("phase ambiguity") {
  const double phi = kPi / 4;
  const double s_t2 = 2.2;
  const double invariant_i = 0.7;
  const double c = -1.0 / std::tan(s_t2 + 2 * phi) / (2 * invariant_i);
  for (double s : {0.1, 0.9, 2.0, 3.5, 6.0}) {
    CHECK(sc_phase_ambiguity(s, phi, s_t2, invariant_i, c) == doctest::Approx(s + phi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sc_phase_ambiguity(kPi - phi, phi, s_t2, invariant_i, c), Error);

  // A generic (I, c) makes ∂σ oscillate: its slope changes sign within a period.
  const double c2 = c + 0.4;
  const double ds = 1e-3;
  int sign_changes = 0;
  double previous = 0.0;
  for (double s = 0.05; s < kPi - 0.05; s += 0.01) {
    const auto f = [&](double t) { return sc_phase_ambiguity(t, 0.0, s_t2, invariant_i, c2); };
    const double second = (f(s + ds) - 2 * f(s) + f(s - ds)) / (ds * ds);
    if (previous != 0.0 && second * previous < 0.0) ++sign_changes;
    previous = second;
  }
  CHECK(sign_changes >= 1);
}
