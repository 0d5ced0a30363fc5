#pragma once

#include <optional>

#include "hypodiff/geometry.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/quadrature.hpp"
#include "hypodiff/types.hpp"

namespace hypodiff {

/// Frozen data of the constant-coefficient Kolmogorov kernel: drift matrix B,
/// number p0 of diffused coordinates and diffusion level M.
class GaussianKernelParams {
 public:
  /// Throws SingularCovariance when kalman_rank(B, p0) < d.
  GaussianKernelParams(Matrix B, int p0, double M = 1.0,
                       std::optional<BlockStructure> structure = std::nullopt);

  const Matrix& B() const noexcept { return B_; }
  int p0() const noexcept { return p0_; }
  int d() const noexcept { return static_cast<int>(B_.rows()); }
  double M() const noexcept { return M_; }
  bool nilpotent() const noexcept { return nilpotent_; }
  const std::optional<BlockStructure>& structure() const noexcept { return structure_; }

 private:
  Matrix B_;
  int p0_;
  double M_;
  bool nilpotent_;
  std::optional<BlockStructure> structure_;
};

struct CovarianceMatrix {
  double s = 0.0;
  Matrix matrix;
  double log_det = 0.0;
};

/// Cv(s) = int_0^s e^{rB} diag(M I_p0, 0) e^{rB*} dr by Gauss-Legendre
/// quadrature. Exact (2d nodes, one panel) when B is nilpotent.
CovarianceMatrix covariance(double s, const GaussianKernelParams& params);

/// Kernel with elapsed time fixed: flow e^{sB}, Cv(s) and its Cholesky factor
/// computed once and reused across (x, xi).
class FrozenGaussian {
 public:
  FrozenGaussian(const GaussianKernelParams& params, double elapsed);

  double elapsed() const noexcept { return cov_.s; }
  const Matrix& flow() const noexcept { return flow_; }
  const CovarianceMatrix& cov() const noexcept { return cov_; }
  /// Lower Cholesky factor of Cv(s).
  const Matrix& factor() const noexcept { return factor_; }

  Vector mean(const Vector& x) const { return flow_ * x; }
  double log_density(const Vector& x, const Vector& xi) const;
  double density(const Vector& x, const Vector& xi) const;
  /// Value at xi = mean: (2 pi)^{-d/2} det(Cv)^{-1/2}.
  double peak() const;

 private:
  Matrix flow_;
  CovarianceMatrix cov_;
  Matrix factor_;
};

/// Gamma_M(t, x; T, xi). Throws NonPositiveElapsed when T <= t.
double gauss_eval(double t, const Vector& x, double T, const Vector& xi,
                  const GaussianKernelParams& params);

/// Integral of Gamma_M(t, x; T, .) by tensor quadrature over +-8 standard
/// deviations along the principal axes of Cv(T-t).
double kernel_mass(double t, const Vector& x, double T, const GaussianKernelParams& params,
                   const BoxQuadratureOptions& options = {});

struct ChapmanKolmogorovResidual {
  double direct = 0.0;      // Gamma(t,x;T,xi)
  double analytic = 0.0;    // |Gaussian composition - direct|
  double quadrature = 0.0;  // |tensor quadrature over z - direct|
};

ChapmanKolmogorovResidual chapman_kolmogorov_residual(double t, double s, double T,
                                                      const Vector& x, const Vector& xi,
                                                      const GaussianKernelParams& params,
                                                      const BoxQuadratureOptions& options = {});

struct PdeResidual {
  double backward = 0.0;  // |K Gamma| in (t, x)
  double forward = 0.0;   // |K* Gamma| in (T, xi)
};

/// Central finite differences with spatial step h and step h^2 along the
/// integral curve of Y. Throws StepTooLarge when h^2 > 0.1 (T - t).
PdeResidual pde_residual(double t, const Vector& x, double T, const Vector& xi,
                         const GaussianKernelParams& params, double h);

}  // namespace hypodiff
