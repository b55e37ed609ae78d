#include "phasequant/diffalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "phasequant/error.hpp"
#include "phasequant/model.hpp"

namespace phasequant::diffalg {

namespace {

void trim(std::vector<int>& jets) {
  while (!jets.empty() && jets.back() == 0) jets.pop_back();
}

Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.p_power = a.p_power + b.p_power;
  out.q0_power = a.q0_power + b.q0_power;
  if (out.p_power >= 2) {
    out.p_power -= 2;
    out.q0_power += 1;
  }
  out.jets.assign(std::max(a.jets.size(), b.jets.size()), 0);
  for (std::size_t i = 0; i < a.jets.size(); ++i) out.jets[i] += a.jets[i];
  for (std::size_t i = 0; i < b.jets.size(); ++i) out.jets[i] += b.jets[i];
  trim(out.jets);
  return out;
}

// Q⁽ⁿ⁾ exponent bump; n ≥ 1.
void bump_jet(Monomial& m, int n, int delta) {
  if (static_cast<int>(m.jets.size()) < n) m.jets.resize(n, 0);
  m.jets[n - 1] += delta;
  trim(m.jets);
}

}  // namespace

JetPoint make_jet_point(const model::SymmetricPotential& v, double energy,
                        std::complex<double> z, int order) {
  JetPoint pt;
  pt.z = z;
  pt.q.reserve(order + 1);
  for (int n = 0; n <= order; ++n) pt.q.push_back(v.q_derivative(energy, z, n));
  if (energy > 0.0) {
    const auto tp = model::turning_point(v, energy);
    pt.t1 = tp.t1;
    pt.t2 = tp.t2;
  }
  return pt;
}

std::complex<double> radical(const JetPoint& pt, Branch branch) {
  const std::complex<double> q0 = pt.q.at(0);
  if (branch == Branch::principal) return std::sqrt(q0);
  // Q = (z − t1)(t2 − z)·g with g > 0 on the real line; the cut sits on
  // [t1, t2] and the sheet is fixed by P → +p from above.
  const std::complex<double> z = pt.z;
  const std::complex<double> a = z - pt.t1;
  const std::complex<double> b = z - pt.t2;
  const std::complex<double> denom = -a * b;
  if (std::abs(denom) == 0.0) return 0.0;
  const std::complex<double> g = q0 / denom;
  return std::complex<double>(0.0, -1.0) * std::sqrt(b) * std::sqrt(a) * std::sqrt(g);
}

JetExpression JetExpression::constant(const mpq_class& c) {
  JetExpression e;
  e.add_term(Monomial{}, c);
  return e;
}

JetExpression JetExpression::radical() {
  return monomial(1, Monomial{1, 0, {}});
}

JetExpression JetExpression::jet(int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative jet order");
  Monomial m;
  if (n == 0) {
    m.q0_power = 1;
  } else {
    m.jets.assign(n, 0);
    m.jets[n - 1] = 1;
  }
  return monomial(1, std::move(m));
}

JetExpression JetExpression::monomial(const mpq_class& c, Monomial m) {
  JetExpression e;
  trim(m.jets);
  e.add_term(m, c);
  return e;
}

void JetExpression::add_term(const Monomial& m, const mpq_class& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

JetExpression& JetExpression::operator+=(const JetExpression& rhs) {
  for (const auto& [m, c] : rhs.terms_) add_term(m, c);
  return *this;
}

JetExpression& JetExpression::operator-=(const JetExpression& rhs) {
  for (const auto& [m, c] : rhs.terms_) add_term(m, -c);
  return *this;
}

JetExpression& JetExpression::operator*=(const mpq_class& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, coeff] : terms_) coeff *= c;
  return *this;
}

JetExpression operator*(const JetExpression& a, const JetExpression& b) {
  JetExpression out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.add_term(multiply(ma, mb), ca * cb);
  }
  return out;
}

JetExpression JetExpression::divided_by_radical() const {
  // 1/P = P/Q.
  JetExpression out;
  for (const auto& [m, c] : terms_) out.add_term(multiply(m, Monomial{1, -1, {}}), c);
  return out;
}

int JetExpression::order() const {
  int order = 0;
  for (const auto& [m, c] : terms_) order = std::max(order, m.max_derivative());
  return order;
}

std::string JetExpression::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    os << (c < 0 ? "-" : (first ? "" : "+"));
    first = false;
    std::vector<std::string> factors;
    const mpq_class magnitude = abs(c);
    if (magnitude != 1) factors.push_back(magnitude.get_str());
    if (m.p_power) factors.push_back("P");
    if (m.q0_power == 1) factors.push_back("Q0");
    if (m.q0_power != 0 && m.q0_power != 1) factors.push_back("Q0^" + std::to_string(m.q0_power));
    for (std::size_t n = 0; n < m.jets.size(); ++n) {
      if (m.jets[n] == 0) continue;
      std::string f = "Q" + std::to_string(n + 1);
      if (m.jets[n] != 1) f += "^" + std::to_string(m.jets[n]);
      factors.push_back(f);
    }
    if (factors.empty()) factors.push_back("1");
    for (std::size_t i = 0; i < factors.size(); ++i) os << (i ? "*" : "") << factors[i];
  }
  return os.str();
}

std::complex<double> JetExpression::evaluate(const JetPoint& pt, Branch branch) const {
  if (terms_.empty()) return 0.0;
  return evaluate_with_radical(pt, phasequant::diffalg::radical(pt, branch));
}

std::complex<double> JetExpression::evaluate_with_radical(const JetPoint& pt,
                                                          std::complex<double> p) const {
  if (terms_.empty()) return 0.0;
  const int needed = order();
  if (static_cast<int>(pt.q.size()) <= needed) {
    throw Error(ErrorKind::InvalidArgument, "jet point carries too few derivatives");
  }
  const std::complex<double> q0 = pt.q[0];
  bool needs_inverse = false;
  for (const auto& [m, c] : terms_) needs_inverse |= (m.q0_power < 0);
  if (needs_inverse && std::abs(q0) == 0.0) {
    throw Error(ErrorKind::PoleAtPoint, "Q vanishes at the evaluation point");
  }
  std::complex<double> sum = 0.0;
  for (const auto& [m, c] : terms_) {
    std::complex<double> term = c.get_d();
    if (m.p_power) term *= p;
    if (m.q0_power != 0) term *= std::pow(q0, m.q0_power);
    for (std::size_t n = 0; n < m.jets.size(); ++n) {
      for (int e = 0; e < m.jets[n]; ++e) term *= pt.q[n + 1];
    }
    sum += term;
  }
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag())) {
    throw Error(ErrorKind::PoleAtPoint, "non-finite value (too close to a turning point)");
  }
  return sum;
}

JetExpression jet_derivative(const JetExpression& e) {
  JetExpression out;
  for (const auto& [m, c] : e.terms()) {
    // P^p: d/dz P = Q1/(2P) = P·Q1/(2Q0).
    if (m.p_power == 1) {
      Monomial d = m;
      d.q0_power -= 1;
      bump_jet(d, 1, 1);
      out += JetExpression::monomial(c / 2, d);
    }
    if (m.q0_power != 0) {
      Monomial d = m;
      d.q0_power -= 1;
      bump_jet(d, 1, 1);
      out += JetExpression::monomial(c * m.q0_power, d);
    }
    for (std::size_t n = 0; n < m.jets.size(); ++n) {
      const int a = m.jets[n];
      if (a == 0) continue;
      Monomial d = m;
      bump_jet(d, static_cast<int>(n) + 1, -1);
      bump_jet(d, static_cast<int>(n) + 2, 1);
      out += JetExpression::monomial(c * a, d);
    }
  }
  return out;
}

JetExpression TermCache::riccati(int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative Riccati order");
  if (k > 2 * max_order_ + 1) {
    throw Error(ErrorKind::InvalidArgument, "Riccati order exceeds cache maximum");
  }
  std::lock_guard lock(mutex_);
  return riccati_locked(k);
}

JetExpression TermCache::riccati_locked(int k) {
  while (static_cast<int>(riccati_.size()) <= k) {
    const int j = static_cast<int>(riccati_.size());
    if (j == 0) {
      riccati_.push_back(JetExpression::radical());
      continue;
    }
    // 2ζ₀′ζⱼ′ = −ζ″_{j−1} − Σ_{i=1}^{j−1} ζ′_{j−i} ζ′_i
    JetExpression rhs = jet_derivative(riccati_[j - 1]);
    for (int i = 1; i < j; ++i) rhs += riccati_[j - i] * riccati_[i];
    rhs *= mpq_class(-1, 2);
    riccati_.push_back(rhs.divided_by_radical());
  }
  return riccati_[k];
}

JetExpression TermCache::sigma(int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative phase-series order");
  if (k > max_order_) {
    throw Error(ErrorKind::InvalidArgument, "phase-series order exceeds cache maximum");
  }
  std::lock_guard lock(mutex_);
  return sigma_locked(k);
}

JetExpression TermCache::sigma_locked(int k) {
  // D = Σ D₂ₖ ħ²ᵏ solves D² + (ħ²/2)(L″ − L′²/2) = Q with L′ = D′/D.
  // [L′]_m follows from D·L′ = D′ order by order.
  while (static_cast<int>(sigma_.size()) <= k) {
    const int j = static_cast<int>(sigma_.size());
    if (j == 0) {
      sigma_.push_back(JetExpression::radical());
      log_derivative_.push_back(jet_derivative(sigma_[0]).divided_by_radical());
      continue;
    }
    const int m = j - 1;  // [L′]_m is already known
    JetExpression rhs;
    for (int i = 1; i < j; ++i) rhs += sigma_[i] * sigma_[j - i];
    rhs += jet_derivative(log_derivative_[m]) * mpq_class(1, 2);
    JetExpression square;
    for (int i = 0; i <= m; ++i) square += log_derivative_[i] * log_derivative_[m - i];
    rhs -= square * mpq_class(1, 4);
    rhs *= mpq_class(-1, 2);
    sigma_.push_back(rhs.divided_by_radical());

    // [L′]_j = (D′₂ⱼ − Σ_{i=1}^{j} D₂ᵢ [L′]_{j−i}) / P
    JetExpression next = jet_derivative(sigma_[j]);
    for (int i = 1; i <= j; ++i) next -= sigma_[i] * log_derivative_[j - i];
    log_derivative_.push_back(next.divided_by_radical());
  }
  return sigma_[k];
}

TermCache& default_cache() {
  static TermCache cache(10);
  return cache;
}

JetExpression riccati_term(int k) { return default_cache().riccati(k); }

JetExpression sigma_term(int k) { return default_cache().sigma(k); }

JetExpression riccati_residual(const std::vector<JetExpression>& zeta_prime, int k) {
  if (k < 1 || k >= static_cast<int>(zeta_prime.size())) {
    throw Error(ErrorKind::InvalidArgument, "residual order out of range");
  }
  JetExpression r = jet_derivative(zeta_prime[k - 1]);
  for (int j = 0; j <= k; ++j) r += zeta_prime[k - j] * zeta_prime[j];
  return r;
}

}  // namespace phasequant::diffalg
