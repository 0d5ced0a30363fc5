#pragma once

#include <map>
#include <vector>

#include "hypodiff/calculus.hpp"

namespace hypodiff {

/// Real polynomial in (t, x_1, ..., x_d) with exact differentiation. Used to
/// build analytic jets and test functions.
class Polynomial {
 public:
  explicit Polynomial(int d) : d_(d) {}

  static Polynomial constant(int d, double c);
  static Polynomial coordinate(int d, int i);
  static Polynomial time(int d);

  /// coeff * t^t_degree * prod x_i^x_exponents[i]
  Polynomial& add_term(double coeff, int t_degree, std::vector<int> x_exponents);

  int d() const noexcept { return d_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  double operator()(double t, const Vector& x) const;

  Polynomial d_dx(int i) const;
  Polynomial d_dt() const;
  /// Y p = d_t p + <Bx, grad p>.
  Polynomial apply_Y(const Matrix& B) const;
  Polynomial derivative(const MultiIndex& beta) const;

  /// max over monomials of 2 * (t-degree) + [beta]_B.
  int intrinsic_degree(const BlockStructure& s) const;

  ScalarField field() const;
  SmoothFunction smooth(const Matrix& B, int p0) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double c, const Polynomial& p);

 private:
  // key[0] is the t-degree, key[1..d] the x exponents.
  using Key = std::vector<int>;
  void accumulate(const Key& key, double coeff);

  int d_;
  std::map<Key, double> terms_;
};

/// Jet of order n of a polynomial at `base`, from exact derivatives.
JetSpec polynomial_jet(const Polynomial& p, const SpaceTimePoint& base, int order, double alpha,
                       const Matrix& B, const BlockStructure& s);

}  // namespace hypodiff
