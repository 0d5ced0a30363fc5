#include "hypodiff/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "hypodiff/error.hpp"

namespace hypodiff {
namespace {

double powi(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

Polynomial Polynomial::constant(int d, double c) {
  Polynomial p(d);
  if (c != 0.0) p.add_term(c, 0, std::vector<int>(d, 0));
  return p;
}

Polynomial Polynomial::coordinate(int d, int i) {
  std::vector<int> e(d, 0);
  e.at(i) = 1;
  Polynomial p(d);
  p.add_term(1.0, 0, std::move(e));
  return p;
}

Polynomial Polynomial::time(int d) {
  Polynomial p(d);
  p.add_term(1.0, 1, std::vector<int>(d, 0));
  return p;
}

void Polynomial::accumulate(const Key& key, double coeff) {
  auto [it, inserted] = terms_.try_emplace(key, coeff);
  if (!inserted) it->second += coeff;
  if (it->second == 0.0) terms_.erase(it);
}

Polynomial& Polynomial::add_term(double coeff, int t_degree, std::vector<int> x_exponents) {
  require(static_cast<int>(x_exponents.size()) == d_, ErrorKind::DimensionMismatch,
          "monomial exponent length differs from d");
  require(t_degree >= 0 && std::all_of(x_exponents.begin(), x_exponents.end(),
                                       [](int e) { return e >= 0; }),
          ErrorKind::InvalidArgument, "negative exponent");
  Key key;
  key.reserve(d_ + 1);
  key.push_back(t_degree);
  key.insert(key.end(), x_exponents.begin(), x_exponents.end());
  if (coeff != 0.0) accumulate(key, coeff);
  return *this;
}

double Polynomial::operator()(double t, const Vector& x) const {
  double total = 0.0;
  for (const auto& [key, c] : terms_) {
    double term = c * powi(t, key[0]);
    for (int i = 0; i < d_; ++i) term *= powi(x(i), key[i + 1]);
    total += term;
  }
  return total;
}

Polynomial Polynomial::d_dx(int i) const {
  Polynomial out(d_);
  for (const auto& [key, c] : terms_) {
    const int e = key[i + 1];
    if (e == 0) continue;
    Key k = key;
    k[i + 1] = e - 1;
    out.accumulate(k, c * e);
  }
  return out;
}

Polynomial Polynomial::d_dt() const {
  Polynomial out(d_);
  for (const auto& [key, c] : terms_) {
    if (key[0] == 0) continue;
    Key k = key;
    k[0] -= 1;
    out.accumulate(k, c * (key[0]));
  }
  return out;
}

Polynomial Polynomial::apply_Y(const Matrix& B) const {
  require(B.rows() == d_ && B.cols() == d_, ErrorKind::DimensionMismatch, "B must be d x d");
  Polynomial out = d_dt();
  for (int i = 0; i < d_; ++i) {
    const Polynomial di = d_dx(i);
    if (di.is_zero()) continue;
    for (int j = 0; j < d_; ++j) {
      if (B(i, j) == 0.0) continue;
      out = out + B(i, j) * (coordinate(d_, j) * di);
    }
  }
  return out;
}

Polynomial Polynomial::derivative(const MultiIndex& beta) const {
  require(beta.size() == d_, ErrorKind::DimensionMismatch, "multi-index length differs from d");
  Polynomial out = *this;
  for (int i = 0; i < d_; ++i)
    for (int e = 0; e < beta.exponents[i]; ++e) out = out.d_dx(i);
  return out;
}

int Polynomial::intrinsic_degree(const BlockStructure& s) const {
  int deg = 0;
  for (const auto& [key, c] : terms_) {
    int h = 2 * key[0];
    for (int i = 0; i < d_; ++i) h += s.exponent(i) * key[i + 1];
    deg = std::max(deg, h);
  }
  return deg;
}

ScalarField Polynomial::field() const {
  return [p = *this](double t, const Vector& x) { return p(t, x); };
}

SmoothFunction Polynomial::smooth(const Matrix& B, int p0) const {
  std::vector<Polynomial> grad;
  std::vector<std::vector<Polynomial>> hess(p0);
  for (int i = 0; i < p0; ++i) {
    grad.push_back(d_dx(i));
    for (int j = 0; j < p0; ++j) hess[i].push_back(grad.back().d_dx(j));
  }
  SmoothFunction f;
  f.value = field();
  f.gradient = [grad](double t, const Vector& x) {
    Vector g(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) g(i) = grad[i](t, x);
    return g;
  };
  f.hessian = [hess](double t, const Vector& x) {
    const auto n = static_cast<Eigen::Index>(hess.size());
    Matrix h(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) h(i, j) = hess[i][j](t, x);
    return h;
  };
  f.drift_derivative = apply_Y(B).field();
  return f;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  require(a.d_ == b.d_, ErrorKind::DimensionMismatch, "polynomial dimensions differ");
  Polynomial out = a;
  for (const auto& [key, c] : b.terms_) out.accumulate(key, c);
  return out;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.d_ == b.d_, ErrorKind::DimensionMismatch, "polynomial dimensions differ");
  Polynomial out(a.d_);
  for (const auto& [ka, ca] : a.terms_) {
    for (const auto& [kb, cb] : b.terms_) {
      Polynomial::Key k(ka.size());
      for (std::size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
      out.accumulate(k, ca * cb);
    }
  }
  return out;
}

Polynomial operator*(double c, const Polynomial& p) {
  Polynomial out(p.d_);
  if (c == 0.0) return out;
  for (const auto& [key, v] : p.terms_) out.accumulate(key, c * v);
  return out;
}

JetSpec polynomial_jet(const Polynomial& p, const SpaceTimePoint& base, int order, double alpha,
                       const Matrix& B, const BlockStructure& s) {
  JetSpec jet(base, order, alpha, s);
  for (const auto& [k, beta] : admissible_pairs(order, s)) {
    Polynomial q = p.derivative(beta);
    for (int i = 0; i < k; ++i) q = q.apply_Y(B);
    jet.set(k, beta, q(base.t, base.x));
  }
  return jet;
}

}  // namespace hypodiff
