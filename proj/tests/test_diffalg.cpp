#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "phasequant/diffalg.hpp"
#include "phasequant/model.hpp"

using namespace phasequant;
using diffalg::Branch;
using diffalg::JetExpression;
using cd = std::complex<double>;

namespace {

// Random jet values with Q > 0 so the principal radical is real.
diffalg::JetPoint random_point(std::mt19937& rng, int order) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  diffalg::JetPoint pt;
  pt.z = 0.0;
  pt.q.push_back(0.5 + std::abs(u(rng)));
  for (int n = 1; n <= order; ++n) pt.q.push_back(u(rng));
  return pt;
}

// Clockwise ellipse around [-t2, t2], trapezoid rule in the angle.
cd contour(const JetExpression& e, const model::SymmetricPotential& v, double energy, int nodes) {
  const double t2 = model::turning_point(v, energy).t2;
  const double b = 0.5 * t2;
  const double a = t2 + b;
  cd sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double th = 2 * std::numbers::pi * j / nodes;
    const cd z(a * std::cos(th), -b * std::sin(th));
    const cd dz(-a * std::sin(th), -b * std::cos(th));
    const auto pt = diffalg::make_jet_point(v, energy, z, e.order() + 1);
    sum += e.evaluate(pt, Branch::cut_between_turning_points) * dz;
  }
  return sum * (2 * std::numbers::pi / nodes);
}

}  // namespace

TEST_CASE("jet derivative chain rule") {
  CHECK(diffalg::jet_derivative(JetExpression::radical()).to_string() == "1/2*P*Q0^-1*Q1");
  CHECK(diffalg::jet_derivative(JetExpression::jet(0)) == JetExpression::jet(1));
  const auto inv_p = JetExpression::radical().divided_by_radical().divided_by_radical();
  CHECK(inv_p.to_string() == "P*Q0^-1");
  CHECK(JetExpression::constant(1).to_string() == "1");
  CHECK(diffalg::jet_derivative(inv_p).to_string() == "-1/2*P*Q0^-2*Q1");
  CHECK(diffalg::jet_derivative(JetExpression::constant(3)).is_zero());
}

TEST_CASE("P squared rewrites to Q") {
  const auto p = JetExpression::radical();
  CHECK(p * p == JetExpression::jet(0));
  CHECK((p * p * p).to_string() == "P*Q0");
}

TEST_CASE("low Riccati terms") {
  CHECK(diffalg::riccati_term(0) == JetExpression::radical());
  CHECK(diffalg::riccati_term(1).to_string() == "-1/4*Q0^-1*Q1");
  // Snapshot of the canonical form of ζ₂′.
  CHECK(diffalg::riccati_term(2).to_string() == "-5/32*P*Q0^-3*Q1^2+1/8*P*Q0^-2*Q2");
}

TEST_CASE("Riccati back-substitution is exact") {
  std::vector<JetExpression> terms;
  for (int k = 0; k <= 8; ++k) terms.push_back(diffalg::riccati_term(k));
  for (int k = 1; k <= 8; ++k) {
    INFO("k = " << k);
    CHECK(diffalg::riccati_residual(terms, k).is_zero());
  }
}

TEST_CASE("phase terms satisfy the phase equation order by order") {
  // D = Σ D₂ₖħ²ᵏ truncated after K terms leaves a residual of order ħ^{2K}
  // in D² + (ħ²/2)(D″/D − (3/2)(D′/D)²) − Q.
  constexpr int K = 5;
  std::vector<JetExpression> d;
  std::vector<JetExpression> d1;
  std::vector<JetExpression> d2;
  for (int k = 0; k < K; ++k) {
    d.push_back(diffalg::sigma_term(k));
    d1.push_back(diffalg::jet_derivative(d.back()));
    d2.push_back(diffalg::jet_derivative(d1.back()));
  }
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pt = random_point(rng, 2 * K + 2);
    const auto residual = [&](double hbar) {
      cd s0 = 0.0, s1 = 0.0, s2 = 0.0;
      double w = 1.0;
      for (int k = 0; k < K; ++k) {
        s0 += w * d[k].evaluate(pt, Branch::principal);
        s1 += w * d1[k].evaluate(pt, Branch::principal);
        s2 += w * d2[k].evaluate(pt, Branch::principal);
        w *= hbar * hbar;
      }
      return std::abs(s0 * s0 + 0.5 * hbar * hbar * (s2 / s0 - 1.5 * (s1 / s0) * (s1 / s0)) - pt.q[0]);
    };
    const double r1 = residual(0.1);
    const double r2 = residual(0.05);
    // ratio 2^{2K} = 1024
    CHECK(r1 / r2 == doctest::Approx(1024.0).epsilon(0.25));
    for (int k = 0; k < K; ++k) CHECK(std::abs(d[k].evaluate(pt, Branch::principal).imag()) == 0.0);
  }
}

TEST_CASE("evaluation") {
  const auto h = model::SymmetricPotential::harmonic();
  const auto pt = diffalg::make_jet_point(h, 0.5, 0.0, 4);
  CHECK(JetExpression::radical().evaluate(pt, Branch::principal).real() == doctest::Approx(1.0));
  CHECK(diffalg::riccati_term(1).evaluate(pt, Branch::principal) == cd(0.0));
  // Harmonic D₂ₖ at x = 0: E = 0.5 gives 1 + 1/4 − 19/32 + ...; the sum cut
  // before the smallest term and halved there is close to 2/√π.
  const auto ground = diffalg::make_jet_point(h, 0.5, 0.0, 12);
  const double d0 = diffalg::sigma_term(0).evaluate(ground, Branch::principal).real();
  const double d2 = diffalg::sigma_term(1).evaluate(ground, Branch::principal).real();
  CHECK(d2 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(diffalg::sigma_term(2).evaluate(ground, Branch::principal).real() == doctest::Approx(-19.0 / 32).epsilon(1e-15));
  CHECK(std::abs(d0 + d2 / 2 - 2 / std::sqrt(std::numbers::pi)) < 5e-3);
  // E = 2.5 (ν = 2): the exact value is 4/√π.
  const auto second = diffalg::make_jet_point(h, 2.5, 0.0, 12);
  double sum = 0.0;
  for (int k = 0; k <= 3; ++k) sum += diffalg::sigma_term(k).evaluate(second, Branch::principal).real();
  CHECK(std::abs(sum - 4 / std::sqrt(std::numbers::pi)) < 1e-3);
}

TEST_CASE("contour integrals of Riccati terms") {
  const auto h = model::SymmetricPotential::harmonic();
  const cd i_pi(0.0, std::numbers::pi);
  CHECK(std::abs(contour(diffalg::riccati_term(0), h, 0.5, 512) - std::numbers::pi) < 1e-12);
  CHECK(std::abs(contour(diffalg::riccati_term(1), h, 0.5, 512) - i_pi) < 1e-12);
  const auto q = model::SymmetricPotential::homogeneous(4);
  // Odd terms beyond the first are total derivatives.
  for (int k : {3, 5, 7}) {
    INFO("k = " << k);
    CHECK(std::abs(contour(diffalg::riccati_term(k), q, 0.53, 2048)) < 1e-10);
  }
}

TEST_CASE("term cache limits") {
  diffalg::TermCache cache(3);
  CHECK(cache.sigma(3).size() > 0);
  CHECK_THROWS(cache.sigma(4));
  CHECK_THROWS(cache.riccati(8));
  CHECK(cache.riccati(7) == diffalg::riccati_term(7));
}
