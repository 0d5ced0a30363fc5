#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hypodiff/calculus.hpp"
#include "hypodiff/error.hpp"
#include "hypodiff/geometry.hpp"
#include "hypodiff/polynomial.hpp"

using namespace hypodiff;

namespace {

Matrix chain(int d) {
  Matrix B = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) B(i, i - 1) = 1.0;
  return B;
}

BlockStructure asian_structure() { return validate_block_form(chain(2), std::vector<int>{1, 1}); }

Vector vec2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST(LieDerivative, Examples) {
  const Matrix B = chain(2);
  const Vector x = vec2(0.7, -0.4);
  EXPECT_NEAR(lie_derivative_Y([](double, const Vector&) { return 3.0; }, 0.5, x, B, 1e-3), 0.0,
              1e-12);
  EXPECT_NEAR(lie_derivative_Y([](double, const Vector& y) { return y(1); }, 0.5, x, B, 1e-3), 0.7,
              1e-12);
  EXPECT_NEAR(lie_derivative_Y([](double t, const Vector&) { return t; }, 0.5, x, B, 1e-3), 1.0,
              1e-12);
}

TEST(LieDerivative, SecondOrderConvergence) {
  const Matrix B = chain(2);
  const Vector x = vec2(0.7, -0.4);
  const ScalarField f = [](double t, const Vector& y) { return std::sin(y(1) + t * y(0)); };
  // Y f = d/dr f(t+r, e^{rB}x) at r=0 = cos(x2 + t x1) * (x1 + x1 + t*0) with dx1/dr = 0.
  const double t = 0.3;
  const double exact = std::cos(x(1) + t * x(0)) * (x(0) + x(0));
  const double e1 = std::abs(lie_derivative_Y(f, t, x, B, 0.1) - exact);
  const double e2 = std::abs(lie_derivative_Y(f, t, x, B, 0.05) - exact);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Taylor, OrderZeroAndBasePoint) {
  const auto s = asian_structure();
  const Matrix B = chain(2);
  JetSpec jet0({0.2, vec2(1.0, 2.0)}, 0, 1.0, s);
  jet0.set(0, MultiIndex::zero(2), 5.0);
  EXPECT_DOUBLE_EQ(taylor_eval(jet0, 0.9, vec2(-3.0, 4.0), B, s), 5.0);

  Polynomial p = Polynomial(2).add_term(1.5, 0, {2, 0}).add_term(-0.5, 1, {0, 1});
  const SpaceTimePoint base{0.3, vec2(0.4, -0.2)};
  for (int n = 0; n <= 4; ++n) {
    const JetSpec jet = polynomial_jet(p, base, n, 1.0, B, s);
    EXPECT_DOUBLE_EQ(taylor_eval(jet, base.t, base.x, B, s), p(base.t, base.x));
  }
}

TEST(Taylor, IncompleteJetAndInadmissibleEntry) {
  const auto s = asian_structure();
  JetSpec jet({0.0, vec2(0.0, 0.0)}, 2, 1.0, s);
  jet.set(0, MultiIndex::zero(2), 1.0);
  EXPECT_FALSE(jet.complete());
  try {
    taylor_eval(jet, 0.1, vec2(0.1, 0.1), chain(2), s);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IncompleteJet);
  }
  EXPECT_THROW(jet.set(0, MultiIndex({0, 1}), 1.0), Error);  // height 3 > 2
}

TEST(Taylor, CoordinateFunctionsOnAsian) {
  const auto s = asian_structure();
  const Matrix B = chain(2);
  const SpaceTimePoint base{0.1, vec2(0.8, -0.3)};
  // f = x_1: reproduced exactly at order 2.
  const JetSpec j1 = polynomial_jet(Polynomial::coordinate(2, 0), base, 2, 1.0, B, s);
  const Vector x = vec2(1.3, 0.9);
  EXPECT_NEAR(taylor_eval(j1, 0.6, x, B, s), 1.3, 1e-15);
  // f = x_2: T = y_2 + (t - s) y_1 and the remainder is (x - e^{(t-s)B} y)_2.
  const JetSpec j2 = polynomial_jet(Polynomial::coordinate(2, 1), base, 2, 1.0, B, s);
  const double dt = 0.5;
  EXPECT_NEAR(taylor_eval(j2, base.t + dt, x, B, s), base.x(1) + dt * base.x(0), 1e-15);
  const double remainder = x(1) - taylor_eval(j2, base.t + dt, x, B, s);
  EXPECT_NEAR(remainder, x(1) - (dt * base.x(0) + base.x(1)), 1e-15);
}

TEST(RemainderFit, SlopesForXTwoAndSine) {
  const auto s = asian_structure();
  const Matrix B = chain(2);
  const SpaceTimePoint base{0.0, vec2(0.0, 0.0)};
  const auto cloud = intrinsic_cloud(base, B, s, 1e-3, 1e-1, 400, 5);
  const JetSpec j2 = polynomial_jet(Polynomial::coordinate(2, 1), base, 2, 1.0, B, s);
  const auto fit2 =
      remainder_order_fit([](double, const Vector& x) { return x(1); }, j2, cloud, B, s);
  EXPECT_GE(fit2.slope, 2.85);
  EXPECT_LE(fit2.slope, 3.2);

  JetSpec js(base, 2, 1.0, s);
  js.set(0, MultiIndex::zero(2), 0.0);
  js.set(0, MultiIndex({1, 0}), 1.0);
  js.set(0, MultiIndex({2, 0}), 0.0);
  js.set(1, MultiIndex::zero(2), 0.0);
  const auto fits = remainder_order_fit([](double, const Vector& x) { return std::sin(x(0)); }, js,
                                        cloud, B, s);
  EXPECT_GE(fits.slope, 2.85);
  EXPECT_LE(fits.slope, 3.2);
}

TEST(RemainderFit, ExactReproductionAndDegenerateCloud) {
  const auto s = asian_structure();
  const Matrix B = chain(2);
  const SpaceTimePoint base{0.2, vec2(0.5, -0.5)};
  // Admissible polynomial of intrinsic degree 4: t x1^2 has 2 + 2 = 4, x1 x2 has 4.
  Polynomial p = Polynomial(2)
                     .add_term(1.0, 1, {2, 0})
                     .add_term(-2.0, 0, {1, 1})
                     .add_term(0.5, 2, {0, 0})
                     .add_term(3.0, 0, {0, 1});
  ASSERT_LE(p.intrinsic_degree(s), 4);
  const JetSpec jet = polynomial_jet(p, base, 4, 1.0, B, s);
  const auto cloud = intrinsic_cloud(base, B, s, 1e-3, 1.0, 200, 9);
  for (const auto& q : cloud) EXPECT_NEAR(taylor_eval(jet, q.t, q.x, B, s), p(q.t, q.x), 1e-12);
  const auto fit = remainder_order_fit(p.field(), jet, cloud, B, s);
  EXPECT_TRUE(fit.exact_reproduction);

  const JetSpec j2 = polynomial_jet(Polynomial::coordinate(2, 1), base, 2, 1.0, B, s);
  const auto narrow = intrinsic_cloud(base, B, s, 0.1, 0.2, 50, 3);
  try {
    remainder_order_fit([](double, const Vector& x) { return x(1); }, j2, narrow, B, s);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateCloud);
  }
}

TEST(PolynomialExactness, RandomAdmissiblePolynomials) {
  const Matrix B = chain(3);
  const auto s = validate_block_form(B, std::vector<int>{1, 1, 1});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int n = 5;
  for (int trial = 0; trial < 5; ++trial) {
    Polynomial p(3);
    for (const auto& [k, beta] : admissible_pairs(n, s)) p.add_term(coef(rng), k, beta.exponents);
    Vector y(3);
    y << coef(rng), coef(rng), coef(rng);
    const SpaceTimePoint base{0.1, y};
    const JetSpec jet = polynomial_jet(p, base, n, 1.0, B, s);
    for (const auto& q : intrinsic_cloud(base, B, s, 1e-2, 1.0, 50, 100 + trial)) {
      EXPECT_NEAR(taylor_eval(jet, q.t, q.x, B, s), p(q.t, q.x), 1e-12);
    }
  }
}

TEST(Holder, Examples) {
  const Matrix B = chain(2);
  SpaceTimeBox V{0.2, 0.4, vec2(-0.5, -0.5), vec2(0.5, 0.5)};
  const SpaceTimePredicate Q = [](double t, const Vector& x) {
    return t > 0.0 && t < 1.0 && x.cwiseAbs().maxCoeff() < 1.0;
  };
  const auto x1 = Direction::spatial(0);
  EXPECT_NEAR(holder_seminorm([](double, const Vector&) { return 2.0; }, x1, 1.0, V, Q, B, 1, 500),
              0.0, 1e-15);
  EXPECT_NEAR(holder_seminorm([](double, const Vector& x) { return x(0); }, x1, 1.0, V, Q, B, 1, 500),
              1.0, 1e-9);
  EXPECT_NEAR(holder_seminorm([](double, const Vector& x) { return x(1); }, x1, 1.0, V, Q, B, 1, 500),
              0.0, 1e-15);
  SpaceTimeBox empty{0.5, 0.4, vec2(0, 0), vec2(1, 1)};
  try {
    holder_seminorm([](double, const Vector& x) { return x(0); }, x1, 1.0, empty, Q, B, 1, 10);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyRegion);
  }
}

TEST(Holder, MonotoneInRegion) {
  const Matrix B = chain(2);
  const ScalarField f = [](double t, const Vector& x) { return std::sin(3 * x(0)) + t * x(1); };
  SpaceTimeBox big{0.1, 0.5, vec2(-0.5, -0.5), vec2(0.5, 0.5)};
  const auto samples = holder_samples(big, 0.05, 2000);
  std::vector<HolderSample> inner;
  for (const auto& h : samples)
    if (std::abs(h.x(0)) < 0.2 && std::abs(h.x(1)) < 0.2) inner.push_back(h);
  ASSERT_FALSE(inner.empty());
  for (const auto dir : {Direction::spatial(0), Direction::drift()}) {
    EXPECT_LE(holder_seminorm_on(f, dir, 0.5, B, inner), holder_seminorm_on(f, dir, 0.5, B, samples));
  }
}
