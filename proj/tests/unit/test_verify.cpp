#include <gtest/gtest.h>

#include <cmath>

#include "hypodiff/error.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/model.hpp"
#include "hypodiff/polynomial.hpp"
#include "hypodiff/verify.hpp"

using namespace hypodiff;

namespace {

Matrix chain(int d) {
  Matrix B = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) B(i, i - 1) = 1.0;
  return B;
}

Vector vec2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

McOptions mc(double dt, std::size_t n, std::uint64_t seed) {
  McOptions o;
  o.dt = dt;
  o.n_paths = n;
  o.seed = seed;
  o.threads = 1;
  return o;
}

ModelSpec zero_noise(double a1 = 0.0) {
  return constant_model("zero", chain(2), {1, 1}, Matrix::Zero(1, 1), Vector::Constant(1, a1),
                        Domain::whole_space(2));
}

}  // namespace

TEST(TailMass, ZeroNoiseIsExactlyZero) {
  const auto r = tail_mass(zero_noise(), 0.0, vec2(1.0, 0.0), 0.1, 0.5, 1.0, mc(1e-3, 100, 1));
  EXPECT_EQ(r.value(), 0.0);
  EXPECT_EQ(r.se(), 0.0);
}

TEST(TailMass, ConstantModelDecreases) {
  const ModelSpec k2 = make_builtin("kolmogorov2");
  double previous = std::numeric_limits<double>::infinity();
  for (double s : {1e-1, 5e-2, 2.5e-2}) {
    const auto r = tail_mass(k2, 0.0, vec2(0, 0), s, 0.5, 1.0, mc(s / 50, 20000, 2));
    EXPECT_LE(r.value(), previous / 2.0 + 3.0 * r.se());
    previous = r.value();
  }
}

TEST(TailMass, RestrictedToCompactSet) {
  const ModelSpec k2 = make_builtin("kolmogorov2");
  const auto all = tail_mass(k2, 0.0, vec2(0, 0), 0.2, 0.3, 1.0, mc(2e-3, 5000, 3));
  const auto none = tail_mass(k2, 0.0, vec2(0, 0), 0.2, 0.3, 1.0, mc(2e-3, 5000, 3),
                              [](const Eigen::Ref<const Vector>&) { return false; });
  EXPECT_GT(all.value(), 0.0);
  EXPECT_EQ(none.value(), 0.0);
}

TEST(GeneratorLimits, ZeroNoiseAndInjectedDrift) {
  const auto zero = generator_limit_first(zero_noise(), 0.0, vec2(1.0, 0.0), 0.01, 0.5,
                                          mc(1e-4, 50, 1));
  EXPECT_NEAR(zero.value(), 0.0, 1e-12);
  const ModelSpec drifted = constant_model("drift", chain(2), {1, 1}, Matrix::Identity(1, 1),
                                           Vector::Constant(1, 0.7), Domain::whole_space(2));
  const auto first = generator_limit_first(drifted, 0.0, vec2(0, 0), 0.01, 1.0, mc(1e-4, 20000, 4));
  EXPECT_LE(std::abs(first.value() - 0.7), 3.0 * first.se());
  EXPECT_TRUE(first.within_se(3.0));
}

TEST(GeneratorLimits, SecondMatchesCovarianceRate) {
  const ModelSpec k2 = make_builtin("kolmogorov2");
  const double s = 0.01;
  const auto g = generator_limit_second(k2, 0.0, vec2(0, 0), s, 1.0, mc(1e-4, 20000, 5));
  EXPECT_TRUE(g.reduced.within_se(3.0)) << g.reduced.estimate;
  // Route consistency against the kernel covariance (mean is e^{sB}x = 0 here).
  const Matrix cv = covariance(s, GaussianKernelParams(chain(2), 1, 1.0)).matrix / s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_LE(std::abs(g.full.estimate(i, j) - cv(i, j)), 3.0 * g.full.std_error(i, j) + 1e-3 * cv(i, j))
          << i << j;
}

TEST(QuasiNormLimit, ZeroNoiseAndScaling) {
  const auto z = quasi_norm_limit(zero_noise(), 0.0, vec2(1, 0), 0.01, 0.5, mc(1e-4, 20, 1));
  EXPECT_LE(z.squared.value(), 1e-6);  // round-off between Euler and exact flow
  const ModelSpec k2 = make_builtin("kolmogorov2");
  std::vector<double> sq, pw;
  for (double s : {1e-2, 1e-3, 1e-4}) {
    const auto q = quasi_norm_limit(k2, 0.0, vec2(0, 0), s, 1.0, mc(s / 20, 5000, 6));
    sq.push_back(q.squared.value());
    pw.push_back(q.power.value());
  }
  for (std::size_t i = 1; i < sq.size(); ++i) {
    EXPECT_LE(sq[i] / sq[i - 1], 2.0);
    EXPECT_GE(sq[i] / sq[i - 1], 0.5);
    EXPECT_LE(pw[i], pw[i - 1] / 2.0);
  }
}

TEST(Ito, ConstantFunctionAndPathwiseIdentity) {
  const ModelSpec asian = make_builtin("asian");
  const auto c = ito_check(asian, Polynomial::constant(2, 3.0).smooth(chain(2), 1), 0.0,
                           vec2(1, 0), 0.1, mc(1e-3, 200, 1));
  EXPECT_EQ(c.martingale_mean, 0.0);
  EXPECT_EQ(c.qv_lhs, 0.0);
  EXPECT_EQ(c.qv_rhs, 0.0);
  const double dt = 1e-3;
  const auto r = ito_check(asian, Polynomial::coordinate(2, 1).smooth(chain(2), 1), 0.0,
                           vec2(1, 0), 0.1, mc(dt, 500, 2));
  EXPECT_LE(r.max_abs_martingale, 10.0 * dt);
  EXPECT_EQ(r.n_used, 500u);
}

TEST(Ito, GbmQuadraticVariation) {
  const auto r = ito_check(make_builtin("asian"), Polynomial::coordinate(2, 0).smooth(chain(2), 1),
                           0.0, vec2(1, 0), 0.1, mc(1e-3, 20000, 3));
  const double target = std::exp(0.1) - 1.0;
  EXPECT_LE(std::abs(r.martingale_mean), 3.0 * r.martingale_se);
  EXPECT_LE(std::abs(r.qv_lhs - target), 3.0 * r.qv_lhs_se);
  EXPECT_LE(std::abs(r.qv_rhs - target), 3.0 * r.qv_rhs_se);
}

TEST(MomentScaling, ConstantAndAsian) {
  const std::vector<double> grid{1e-3, 3e-3, 1e-2, 3e-2};
  const auto k2 = moment_scaling(make_builtin("kolmogorov2"), 0.0, vec2(0, 0), 2, grid,
                                 mc(1e-3, 5000, 8));
  EXPECT_NEAR(k2.slope, 1.0, 0.05);
  const auto a = moment_scaling(make_builtin("asian"), 0.0, vec2(1, 0), 2, grid, mc(1e-3, 5000, 9));
  EXPECT_NEAR(a.slope, 1.0, 0.1);
  const auto q4 = moment_scaling(make_builtin("kolmogorov2"), 0.0, vec2(0, 0), 4, grid,
                                 mc(1e-3, 5000, 10));
  EXPECT_GE(q4.slope, 1.9);
  EXPECT_THROW(moment_scaling(make_builtin("kolmogorov2"), 0.0, vec2(0, 0), 3, grid, mc(1e-3, 10, 1)),
               Error);
}

TEST(Uniformity, ErrorsOfTheSameOrder) {
  const ModelSpec pert = make_builtin("perturbed");
  std::vector<Vector> H{vec2(-0.5, 0), vec2(0, 0), vec2(0.5, 0), vec2(1.0, 0.5), vec2(-1.0, -0.5)};
  const auto probe = uniformity_probe(pert, 0.0, H, 0.01, 1.0, mc(5e-4, 4000, 11));
  EXPECT_EQ(probe.errors.size(), 5u);
  EXPECT_LE(probe.ratio, 10.0);
}

TEST(LimitReportJson, Fields) {
  const auto r = generator_limit_second(make_builtin("kolmogorov2"), 0.0, vec2(0, 0), 0.01, 1.0,
                                        mc(1e-3, 100, 1));
  const auto j = to_json(r.reduced);
  for (const char* key : {"name", "estimate", "se", "target", "elapsed", "n_paths", "seed"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["estimate"].is_array());
  EXPECT_EQ(j["n_paths"], 100);
}

TEST(LineFit, ExactLine) {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}
