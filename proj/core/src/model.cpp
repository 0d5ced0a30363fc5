#include "hypodiff/model.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "hypodiff/error.hpp"

namespace hypodiff {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix kolmogorov_chain(int d) {
  Matrix B = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) B(i, i - 1) = 1.0;
  return B;
}
}  // namespace

Domain Domain::whole_space(int d) {
  require(d >= 1, ErrorKind::InvalidArgument, "domain dimension must be positive");
  Domain D;
  D.lower_ = Vector::Constant(d, -kInf);
  D.upper_ = Vector::Constant(d, kInf);
  return D;
}

Domain Domain::box(Vector lower, Vector upper) {
  require(lower.size() == upper.size() && lower.size() >= 1, ErrorKind::DimensionMismatch,
          "domain bounds must have equal positive length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(!std::isnan(lower(i)) && !std::isnan(upper(i)) && lower(i) < upper(i),
            ErrorKind::InvalidArgument, "domain bounds must satisfy lower < upper");
  }
  Domain D;
  D.lower_ = std::move(lower);
  D.upper_ = std::move(upper);
  return D;
}

bool Domain::contains(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) > lower_(i) && x(i) < upper_(i))) return false;
  }
  return true;
}

double Domain::distance_to_boundary(const Vector& x) const {
  require(x.size() == lower_.size(), ErrorKind::DimensionMismatch, "point has wrong dimension");
  if (!contains(x)) return 0.0;
  double dist = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    dist = std::min({dist, x(i) - lower_(i), upper_(i) - x(i)});
  }
  return dist;
}

Matrix ModelSpec::diffusion_at(double t, const Vector& x) const {
  if (constant_diffusion) return *constant_diffusion;
  Matrix A(p0, p0);
  diffusion(t, x, A);
  return A;
}

Vector ModelSpec::drift_at(double t, const Vector& x) const {
  if (constant_drift) return *constant_drift;
  Vector a(p0);
  drift(t, x, a);
  return a;
}

bool lower_factor(const Eigen::Ref<const Matrix>& A, Eigen::Ref<Matrix> L) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || L.rows() != n || L.cols() != n) return false;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(A(i, i)));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (!(std::abs(A(i, j) - A(j, i)) <= 1e-12 * (1.0 + scale))) return false;
  const double tol = 1e-14 * std::max(scale, 1e-300);
  L.setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = A(j, j);
    for (Eigen::Index k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
    if (!(s >= -tol)) return false;
    if (s <= tol) {
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double v = A(i, j);
        for (Eigen::Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
        if (std::abs(v) > std::sqrt(tol) * (1.0 + std::sqrt(scale))) return false;
      }
      continue;
    }
    const double ljj = std::sqrt(s);
    L(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = A(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / ljj;
    }
  }
  return true;
}

ModelSpec constant_model(std::string name, Matrix B, std::vector<int> sizes, Matrix A, Vector a,
                         Domain domain) {
  BlockStructure structure = validate_block_form(B, sizes);
  const int p0 = structure.p0();
  const int d = structure.d();
  require(A.rows() == p0 && A.cols() == p0, ErrorKind::DimensionMismatch,
          "diffusion matrix must be p0 x p0");
  require(a.size() == p0, ErrorKind::DimensionMismatch, "first-order term must have length p0");
  require(domain.d() == d, ErrorKind::DimensionMismatch, "domain dimension must equal d");
  Matrix L(p0, p0);
  require(lower_factor(A, L), ErrorKind::NonSPDDiffusion,
          "diffusion matrix is not symmetric positive semidefinite");

  ModelSpec m;
  m.name = std::move(name);
  m.p0 = p0;
  m.d = d;
  m.B = B;
  m.structure = structure;
  m.diffusion = [A](double, const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) { out = A; };
  m.drift = [a](double, const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> out) { out = a; };
  m.domain = domain;
  m.outer_domain = domain;
  m.T0 = 1.0;
  m.constant_diffusion = A;
  m.constant_drift = a;
  m.alpha = 1.0;
  m.N = 2;

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  m.M = lmin > 0.0 ? std::max({lmax, 1.0 / lmin, 1.0}) : kInf;

  const double m0 = A(0, 0);
  const bool scalar = m0 > 0.0 && (A - m0 * Matrix::Identity(p0, p0)).cwiseAbs().maxCoeff() <=
                                      1e-14 * m0;
  if (scalar && a.cwiseAbs().maxCoeff() == 0.0 && kalman_rank(B, p0) == d) {
    m.exact_kernel.emplace(B, p0, m0, structure);
  }
  return m;
}

ModelSpec asian_model(double floor) {
  require(floor > 0.0 && floor < 1.0, ErrorKind::InvalidArgument,
          "asian domain floor must lie in (0, 1)");
  ModelSpec m;
  m.name = "asian";
  m.p0 = 1;
  m.d = 2;
  m.B = kolmogorov_chain(2);
  const std::vector<int> sizes{1, 1};
  m.structure = validate_block_form(m.B, sizes);
  m.diffusion = [](double, const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out) {
    out(0, 0) = x(0) * x(0);
  };
  m.drift = [](double, const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> out) { out(0) = 0.0; };
  Vector lo(2), hi(2);
  lo << floor, -kInf;
  hi << 1.0 / floor, kInf;
  m.domain = Domain::box(lo, hi);
  Vector olo(2), ohi(2);
  olo << 0.0, -kInf;
  ohi << kInf, kInf;
  m.outer_domain = Domain::box(olo, ohi);
  m.T0 = 10.0;
  m.M = 1.0 / (floor * floor);
  m.alpha = 1.0;
  m.N = 2;
  m.constant_drift = Vector::Zero(1);
  return m;
}

ModelSpec kolmogorov2_model() {
  ModelSpec m = constant_model("kolmogorov2", kolmogorov_chain(2), {1, 1}, Matrix::Identity(1, 1),
                               Vector::Zero(1), Domain::whole_space(2));
  m.T0 = 10.0;
  return m;
}

ModelSpec kolmogorov3_model() {
  ModelSpec m = constant_model("kolmogorov3", kolmogorov_chain(3), {1, 1, 1},
                               Matrix::Identity(1, 1), Vector::Zero(1), Domain::whole_space(3));
  m.T0 = 10.0;
  return m;
}

ModelSpec perturbed_model() {
  ModelSpec m;
  m.name = "perturbed";
  m.p0 = 1;
  m.d = 2;
  m.B = kolmogorov_chain(2);
  const std::vector<int> sizes{1, 1};
  m.structure = validate_block_form(m.B, sizes);
  m.diffusion = [](double, const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out) {
    out(0, 0) = 1.0 + 0.5 * std::sin(x(0));
  };
  m.drift = [](double, const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> out) { out(0) = 0.0; };
  m.domain = Domain::whole_space(2);
  m.outer_domain = m.domain;
  m.T0 = 10.0;
  m.M = 2.0;
  m.alpha = 1.0;
  m.N = 2;
  m.constant_drift = Vector::Zero(1);
  return m;
}

std::vector<ModelEntry> builtin_models(double asian_floor) {
  return {
      {"asian", "dX1 = X1 dW, dX2 = X1 dt on ]a,1/a[ x R, stopped outside ]0,inf[ x R",
       [asian_floor] { return asian_model(asian_floor); }},
      {"kolmogorov2", "dX1 = dW, dX2 = X1 dt on R^2", [] { return kolmogorov2_model(); }},
      {"kolmogorov3", "three-step chain dX1 = dW, dX2 = X1 dt, dX3 = X2 dt on R^3",
       [] { return kolmogorov3_model(); }},
      {"perturbed", "dX1 = sqrt(1 + sin(X1)/2) dW, dX2 = X1 dt on R^2",
       [] { return perturbed_model(); }},
  };
}

ModelSpec make_builtin(const std::string& name, double asian_floor) {
  for (const auto& e : builtin_models(asian_floor)) {
    if (e.name == name) return e.make();
  }
  fail(ErrorKind::InvalidArgument, "unknown model '" + name + "'");
}

CoercivityCheck check_coercivity(const ModelSpec& model, const SpaceTimeBox& box, int n,
                                 std::uint64_t seed) {
  require(n > 0, ErrorKind::InvalidArgument, "sample count must be positive");
  require(box.x_lo.size() == model.d && box.x_hi.size() == model.d, ErrorKind::DimensionMismatch,
          "sampling box has wrong dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  CoercivityCheck out;
  out.min_ratio = kInf;
  out.max_ratio = -kInf;
  Vector x(model.d), xi(model.p0);
  for (int k = 0; k < n; ++k) {
    const double t = box.t_lo + (box.t_hi - box.t_lo) * unif(rng);
    for (int i = 0; i < model.d; ++i) x(i) = box.x_lo(i) + (box.x_hi(i) - box.x_lo(i)) * unif(rng);
    for (int i = 0; i < model.p0; ++i) xi(i) = normal(rng);
    if (!model.domain.contains(x) || xi.squaredNorm() == 0.0) continue;
    const Matrix A = model.diffusion_at(t, x);
    const double ratio = xi.dot(A * xi) / xi.squaredNorm();
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.points;
  }
  require(out.points > 0, ErrorKind::EmptyRegion, "no sample fell inside the domain");
  const double slack = 1e-12;
  out.holds = out.min_ratio >= 1.0 / model.M - slack && out.max_ratio <= model.M + slack;
  return out;
}

double default_delta(const ModelSpec& model, const Vector& x) {
  const double dist = model.domain.distance_to_boundary(x);
  require(dist > 0.0, ErrorKind::StartOutsideRegion, "point lies outside the domain");
  return std::isinf(dist) ? 1.0 : std::min(0.5 * dist, 1.0);
}

double reference_level(const ModelSpec& model, double t, const Vector& x) {
  const double level = model.diffusion_at(t, x).trace() / model.p0;
  return level > 0.0 && std::isfinite(level) ? level : 1.0;
}

Matrix reference_covariance(const ModelSpec& model, double t, const Vector& x, double s) {
  const GaussianKernelParams params(model.B, model.p0, reference_level(model, t, x),
                                    model.structure);
  return covariance(s, params).matrix;
}

}  // namespace hypodiff
