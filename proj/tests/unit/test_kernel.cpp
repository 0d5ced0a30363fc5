#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hypodiff/error.hpp"
#include "hypodiff/geometry.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/quadrature.hpp"

using namespace hypodiff;

namespace {

Matrix chain(int d) {
  Matrix B = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) B(i, i - 1) = 1.0;
  return B;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

}  // namespace

TEST(Quadrature, GaussLegendreAndHermiteIntegratePolynomials) {
  const auto gl = gauss_legendre(5, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 9);
  EXPECT_NEAR(s, std::pow(2.0, 10) / 10.0, 1e-11);
  const auto gh = gauss_hermite(10);
  double m0 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    m0 += gh.weights[i];
    m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
  }
  EXPECT_NEAR(m0, std::sqrt(std::numbers::pi), 1e-13);
  EXPECT_NEAR(m2, std::sqrt(std::numbers::pi) / 2.0, 1e-13);
}

TEST(Covariance, AsianClosedForm) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  for (double s : {1e-3, 0.1, 1.0, 4.0}) {
    Matrix c(2, 2);
    c << s, s * s / 2, s * s / 2, s * s * s / 3;
    EXPECT_LE((covariance(s, p).matrix - c).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, s * s * s));
  }
  EXPECT_LE(covariance(1e-9, p).matrix.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Covariance, CompositionLaw) {
  Matrix B(2, 2);
  B << -0.3, 0.2, 1.0, -0.5;  // not nilpotent
  for (const auto& params : {GaussianKernelParams(chain(2), 1, 1.0),
                             GaussianKernelParams(chain(3), 1, 2.0),
                             GaussianKernelParams(B, 1, 1.5)}) {
    for (double t : {0.2, 1.0})
      for (double s : {0.05, 0.7}) {
        const Matrix E = mat_exp(params.B(), s);
        const Matrix lhs = covariance(t + s, params).matrix;
        const Matrix rhs = E * covariance(t, params).matrix * E.transpose() +
                           covariance(s, params).matrix;
        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
      }
  }
}

TEST(Covariance, DilationScaling) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  const auto s = validate_block_form(chain(2), std::vector<int>{1, 1});
  for (double lambda : {0.1, 0.5, 3.0}) {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = lambda;
    D(1, 1) = lambda * lambda * lambda;
    const Matrix lhs = covariance(lambda * lambda * 0.7, p).matrix;
    const Matrix rhs = D * covariance(0.7, p).matrix * D;
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * rhs.cwiseAbs().maxCoeff());
  }
  (void)s;
}

TEST(Covariance, DeterminantPositiveIffHypoelliptic) {
  EXPECT_THROW(GaussianKernelParams(Matrix::Zero(2, 2), 1, 1.0), Error);
  const GaussianKernelParams p(chain(3), 1, 1.0);
  for (double s = 1e-4; s <= 1.0; s *= 10.0) {
    EXPECT_GT(covariance(s, p).matrix.determinant(), 0.0);
  }
}

TEST(GaussEval, PeakValueAndErrors) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  const Vector z = Vector::Zero(2);
  EXPECT_NEAR(gauss_eval(0.0, z, 1.0, z, p), std::sqrt(12.0) / (2 * std::numbers::pi), 1e-14);
  const Vector x = vec({0.3, -0.2});
  const FrozenGaussian g(p, 0.4);
  EXPECT_NEAR(gauss_eval(0.1, x, 0.5, g.mean(x), p), g.peak(), 1e-12 * g.peak());
  EXPECT_THROW(gauss_eval(1.0, z, 1.0, z, p), Error);
  try {
    gauss_eval(1.0, z, 0.5, z, p);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveElapsed);
  }
}

TEST(GaussEval, PositiveAndReflectionSymmetric) {
  const GaussianKernelParams p(chain(3), 1, 1.0);
  const Vector x = vec({0.2, 0.1, -0.3});
  const FrozenGaussian g(p, 0.8);
  const Vector m = g.mean(x);
  const Matrix axes = principal_axes(g.cov().matrix);
  for (int k = 0; k < 3; ++k) {
    const Vector u = 1.7 * axes.col(k);
    const double a = g.density(x, m + u);
    const double b = g.density(x, m - u);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(a, b, 1e-13 * a);
  }
}

TEST(GaussEval, Normalisation) {
  EXPECT_NEAR(kernel_mass(0.0, vec({0.5, 0.0}), 1.0, GaussianKernelParams(chain(2), 1, 1.0)), 1.0,
              1e-6);
  BoxQuadratureOptions opts;
  opts.panels = 8;
  EXPECT_NEAR(kernel_mass(0.0, vec({0.5, 0.0, 1.0}), 0.3,
                          GaussianKernelParams(chain(3), 1, 2.0), opts),
              1.0, 1e-6);
}

TEST(ChapmanKolmogorov, AnalyticAndQuadratureRoutes) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  const Vector z = Vector::Zero(2);
  const auto r = chapman_kolmogorov_residual(0.0, 0.5, 1.0, z, z, p);
  EXPECT_LE(r.analytic, 1e-12);
  EXPECT_LE(r.quadrature, 1e-6);
  const auto r2 = chapman_kolmogorov_residual(0.0, 0.3, 0.9, vec({0.4, -0.1}), vec({0.1, 0.2}), p);
  EXPECT_LE(r2.analytic, 1e-12 * std::max(1.0, r2.direct));
  // Split close to t: one factor tends to the identity kernel.
  const auto r3 = chapman_kolmogorov_residual(0.0, 1e-3, 1.0, z, vec({0.2, 0.1}), p);
  EXPECT_LE(r3.analytic, 1e-12);
}

TEST(PdeResidual, SmallAtFineStepAndSecondOrder) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  const Vector z = Vector::Zero(2);
  const Vector xi = vec({0.3, 0.2});
  const auto fine = pde_residual(0.0, z, 1.0, xi, p, 1e-3);
  EXPECT_LE(fine.backward, 1e-5);
  EXPECT_LE(fine.forward, 1e-5);
  const auto a = pde_residual(0.0, z, 1.0, xi, p, 0.1);
  const auto b = pde_residual(0.0, z, 1.0, xi, p, 0.05);
  EXPECT_GT(a.backward / b.backward, 3.4);
  EXPECT_LT(a.backward / b.backward, 4.6);
  EXPECT_GT(a.forward / b.forward, 3.4);
  EXPECT_LT(a.forward / b.forward, 4.6);
}

TEST(PdeResidual, Errors) {
  const GaussianKernelParams p(chain(2), 1, 1.0);
  const Vector z = Vector::Zero(2);
  try {
    pde_residual(0.0, z, 0.01, z, p, 0.1);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StepTooLarge);
  }
  try {
    pde_residual(1.0, z, 0.0, z, p, 1e-3);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveElapsed);
  }
}
