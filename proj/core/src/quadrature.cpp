#include "hypodiff/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hypodiff/error.hpp"

namespace hypodiff {

QuadratureRule gauss_legendre(int n, double a, double b) {
  require(n >= 1, ErrorKind::InvalidArgument, "quadrature order must be >= 1");
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int k = 0; k < n; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    rule.nodes[k] = mid + half * eig.eigenvalues()(k);
    rule.weights[k] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

QuadratureRule gauss_hermite(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "quadrature order must be >= 1");
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (int k = 0; k < n; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    rule.nodes[k] = eig.eigenvalues()(k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
  require(panels >= 1, ErrorKind::InvalidArgument, "panel count must be >= 1");
  QuadratureRule out;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const QuadratureRule r = gauss_legendre(order, a + p * width, a + (p + 1) * width);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

double tensor_box_integral(const Vector& center, const Matrix& axes,
                           const std::function<double(const Vector&)>& f,
                           const BoxQuadratureOptions& options) {
  const int d = static_cast<int>(center.size());
  require(axes.rows() == d && axes.cols() == d, ErrorKind::DimensionMismatch,
          "axes must be d x d");
  const QuadratureRule rule = composite_gauss_legendre(options.panels, options.order,
                                                       -options.half_width, options.half_width);
  const int m = static_cast<int>(rule.nodes.size());
  std::vector<int> idx(d, 0);
  Vector u(d);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      u(k) = rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    total += w * f(center + axes * u);
    int k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  return total * std::abs(axes.determinant());
}

Matrix principal_axes(const Matrix& covariance) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  require(eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0,
          ErrorKind::SingularCovariance, "covariance is not positive definite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal();
}

}  // namespace hypodiff
