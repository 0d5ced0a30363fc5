#pragma once

#include <functional>
#include <vector>

#include "hypodiff/types.hpp"

namespace hypodiff {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Golub-Welsch).
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Hermite rule for the weight exp(-u^2) on the real line.
QuadratureRule gauss_hermite(int n);

/// Composite Gauss-Legendre on [a, b] with equal panels.
QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b);

struct BoxQuadratureOptions {
  double half_width = 8.0;  // in units of the axis columns
  int panels = 16;
  int order = 8;
};

/// Tensor-product integral of f over {center + axes * u : |u_k| <= half_width}.
/// `axes` columns are the (scaled) directions; the Jacobian |det axes| is applied.
double tensor_box_integral(const Vector& center, const Matrix& axes,
                           const std::function<double(const Vector&)>& f,
                           const BoxQuadratureOptions& options = {});

/// Principal axes of an SPD matrix: columns sqrt(lambda_k) v_k.
Matrix principal_axes(const Matrix& covariance);

}  // namespace hypodiff
