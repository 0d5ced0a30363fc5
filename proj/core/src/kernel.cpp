#include "hypodiff/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "hypodiff/error.hpp"

namespace hypodiff {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Matrix diffusion_block(const GaussianKernelParams& p) {
  Matrix sigma0 = Matrix::Zero(p.d(), p.d());
  sigma0.topLeftCorner(p.p0(), p.p0()).diagonal().setConstant(p.M());
  return sigma0;
}

void check_elapsed(double t, double T) {
  require(T > t, ErrorKind::NonPositiveElapsed, "kernel requires T > t");
}

double check_step(double t, double T, double h) {
  require(h > 0.0, ErrorKind::InvalidArgument, "step must be positive");
  require(h * h <= 0.1 * (T - t), ErrorKind::StepTooLarge, "h^2 exceeds 0.1 (T - t)");
  return h * h;
}

}  // namespace

GaussianKernelParams::GaussianKernelParams(Matrix B, int p0, double M,
                                           std::optional<BlockStructure> structure)
    : B_(std::move(B)), p0_(p0), M_(M), nilpotent_(false), structure_(std::move(structure)) {
  require(M_ > 0.0, ErrorKind::InvalidArgument, "diffusion level M must be positive");
  if (kalman_rank(B_, p0_) != B_.rows()) {
    fail(ErrorKind::SingularCovariance, "Kalman rank below d: covariance is singular for all s");
  }
  if (structure_) {
    require(structure_->d() == d() && structure_->p0() == p0_, ErrorKind::DimensionMismatch,
            "block structure does not match (B, p0)");
  }
  nilpotent_ = is_nilpotent(B_);
}

CovarianceMatrix covariance(double s, const GaussianKernelParams& params) {
  require(s > 0.0, ErrorKind::SingularCovariance, "covariance requires s > 0");
  const int d = params.d();
  const Matrix sigma0 = diffusion_block(params);

  int panels = 1;
  int order = 2 * d;
  if (!params.nilpotent()) {
    const double norm = params.B().cwiseAbs().rowwise().sum().maxCoeff();
    panels = std::max(1, static_cast<int>(std::ceil(s * norm / 0.25)));
    order = std::max(order, 8);
  }
  const QuadratureRule rule = composite_gauss_legendre(panels, order, 0.0, s);

  Matrix cv = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Matrix E = mat_exp(params.B(), rule.nodes[k]);
    cv.noalias() += rule.weights[k] * (E * sigma0 * E.transpose());
  }
  cv = 0.5 * (cv + cv.transpose());

  const Eigen::LLT<Matrix> llt(cv);
  if (llt.info() != Eigen::Success) fail(ErrorKind::SingularCovariance, "Cv(s) is not SPD");
  const Matrix L = llt.matrixL();
  const Vector diag = L.diagonal();
  if (diag.minCoeff() <= 0.0) fail(ErrorKind::SingularCovariance, "Cv(s) is not SPD");
  CovarianceMatrix out;
  out.s = s;
  out.matrix = cv;
  out.log_det = 2.0 * diag.array().log().sum();
  return out;
}

FrozenGaussian::FrozenGaussian(const GaussianKernelParams& params, double elapsed)
    : flow_(mat_exp(params.B(), elapsed)), cov_(covariance(elapsed, params)) {
  factor_ = Eigen::LLT<Matrix>(cov_.matrix).matrixL();
}

double FrozenGaussian::log_density(const Vector& x, const Vector& xi) const {
  const Vector z = xi - flow_ * x;
  const Vector w = factor_.triangularView<Eigen::Lower>().solve(z);
  const double d = static_cast<double>(z.size());
  return -0.5 * (d * kLog2Pi + cov_.log_det + w.squaredNorm());
}

double FrozenGaussian::density(const Vector& x, const Vector& xi) const {
  return std::exp(log_density(x, xi));
}

double FrozenGaussian::peak() const {
  const double d = static_cast<double>(flow_.rows());
  return std::exp(-0.5 * (d * kLog2Pi + cov_.log_det));
}

double gauss_eval(double t, const Vector& x, double T, const Vector& xi,
                  const GaussianKernelParams& params) {
  check_elapsed(t, T);
  return FrozenGaussian(params, T - t).density(x, xi);
}

double kernel_mass(double t, const Vector& x, double T, const GaussianKernelParams& params,
                   const BoxQuadratureOptions& options) {
  check_elapsed(t, T);
  const FrozenGaussian g(params, T - t);
  return tensor_box_integral(g.mean(x), principal_axes(g.cov().matrix),
                             [&](const Vector& xi) { return g.density(x, xi); }, options);
}

ChapmanKolmogorovResidual chapman_kolmogorov_residual(double t, double s, double T,
                                                      const Vector& x, const Vector& xi,
                                                      const GaussianKernelParams& params,
                                                      const BoxQuadratureOptions& options) {
  require(t < s && s < T, ErrorKind::NonPositiveElapsed, "requires t < s < T");
  const FrozenGaussian first(params, s - t);
  const FrozenGaussian second(params, T - s);
  const FrozenGaussian whole(params, T - t);

  ChapmanKolmogorovResidual out;
  out.direct = whole.density(x, xi);

  // Composition: N(xi; E2 E1 x, E2 C1 E2^T + C2).
  {
    const Matrix& E2 = second.flow();
    const Vector m = E2 * first.mean(x);
    const Matrix C = E2 * first.cov().matrix * E2.transpose() + second.cov().matrix;
    const Eigen::LLT<Matrix> llt(C);
    const Matrix L = llt.matrixL();
    const Vector w = L.triangularView<Eigen::Lower>().solve(xi - m);
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const double dd = static_cast<double>(xi.size());
    const double composed = std::exp(-0.5 * (dd * kLog2Pi + log_det + w.squaredNorm()));
    out.analytic = std::abs(composed - out.direct);
  }

  // Quadrature over z. The box follows the precision of the product so that
  // it stays resolved when either factor is sharply concentrated.
  {
    const Matrix P1 = first.cov().matrix.inverse();
    const Matrix P2 = second.flow().transpose() * second.cov().matrix.inverse() * second.flow();
    const Matrix Cz = (P1 + P2).inverse();
    const Vector cz = Cz * (P1 * first.mean(x) +
                            second.flow().transpose() * second.cov().matrix.inverse() * xi);
    const double integral = tensor_box_integral(
        cz, principal_axes(0.5 * (Cz + Cz.transpose())),
        [&](const Vector& z) { return first.density(x, z) * second.density(z, xi); }, options);
    out.quadrature = std::abs(integral - out.direct);
  }
  return out;
}

PdeResidual pde_residual(double t, const Vector& x, double T, const Vector& xi,
                         const GaussianKernelParams& params, double h) {
  check_elapsed(t, T);
  const double delta = check_step(t, T, h);
  const int p0 = params.p0();
  const double M = params.M();
  const Matrix& B = params.B();
  const Matrix step_fwd = mat_exp(B, delta);
  const Matrix step_bwd = mat_exp(B, -delta);

  PdeResidual out;
  {
    const FrozenGaussian g(params, T - t);
    const double centre = g.density(x, xi);
    double lap = 0.0;
    for (int i = 0; i < p0; ++i) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      lap += (g.density(xp, xi) - 2.0 * centre + g.density(xm, xi)) / (h * h);
    }
    const FrozenGaussian later(params, T - t - delta);
    const FrozenGaussian earlier(params, T - t + delta);
    const double y_term =
        (later.density(step_fwd * x, xi) - earlier.density(step_bwd * x, xi)) / (2.0 * delta);
    out.backward = std::abs(0.5 * M * lap + y_term);
  }
  {
    const FrozenGaussian g(params, T - t);
    const double centre = g.density(x, xi);
    double lap = 0.0;
    for (int i = 0; i < p0; ++i) {
      Vector xp = xi, xm = xi;
      xp(i) += h;
      xm(i) -= h;
      lap += (g.density(x, xp) - 2.0 * centre + g.density(x, xm)) / (h * h);
    }
    const FrozenGaussian later(params, T - t + delta);
    const FrozenGaussian earlier(params, T - t - delta);
    const double y_term =
        (later.density(x, step_fwd * xi) - earlier.density(x, step_bwd * xi)) / (2.0 * delta);
    out.forward = std::abs(0.5 * M * lap - y_term - B.trace() * centre);
  }
  return out;
}

}  // namespace hypodiff
