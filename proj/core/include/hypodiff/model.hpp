#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hypodiff/calculus.hpp"
#include "hypodiff/geometry.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/types.hpp"

namespace hypodiff {

/// Open axis-aligned box; infinite bounds allowed.
class Domain {
 public:
  Domain() = default;
  static Domain whole_space(int d);
  static Domain box(Vector lower, Vector upper);

  int d() const noexcept { return static_cast<int>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  bool contains(const Eigen::Ref<const Vector>& x) const;
  /// Euclidean distance to the boundary; +inf for the whole space.
  double distance_to_boundary(const Vector& x) const;

 private:
  Vector lower_;
  Vector upper_;
};

using DiffusionFn =
    std::function<void(double t, const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out)>;
using DriftFn =
    std::function<void(double t, const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out)>;

/// A local diffusion: diffusion matrix A = (a_ij) and first-order terms a_i on
/// the first p0 coordinates, constant drift matrix B, domain D and the outer
/// domain D' (D' contains D) used for the stopped process.
struct ModelSpec {
  std::string name;
  int p0 = 1;
  int d = 1;
  Matrix B;
  BlockStructure structure;
  DiffusionFn diffusion;
  DriftFn drift;
  Domain domain;
  Domain outer_domain;
  double T0 = 1.0;
  double M = 1.0;
  double alpha = 1.0;
  int N = 2;
  /// Set when the coefficients are constant (A, a); lets the simulator skip
  /// callbacks.
  std::optional<Matrix> constant_diffusion;
  std::optional<Vector> constant_drift;
  /// Set when the law of X is exactly the Gaussian kernel Gamma_M.
  std::optional<GaussianKernelParams> exact_kernel;

  Matrix diffusion_at(double t, const Vector& x) const;
  Vector drift_at(double t, const Vector& x) const;
};

/// Lower-triangular L with L L^T = A for symmetric positive semidefinite A.
/// Returns false when A is not symmetric PSD.
bool lower_factor(const Eigen::Ref<const Matrix>& A, Eigen::Ref<Matrix> L);

/// Constant-coefficient model. The exact Gaussian kernel is attached when
/// A = m I, a = 0 and (B, p0) is hypoelliptic.
ModelSpec constant_model(std::string name, Matrix B, std::vector<int> sizes, Matrix A, Vector a,
                         Domain domain);

/// dX^1 = X^1 dW, dX^2 = X^1 dt. D = ]floor, 1/floor[ x R, D' = ]0, inf[ x R.
ModelSpec asian_model(double floor = 0.1);
/// B = [[0,0],[1,0]], A = I, D = R^2.
ModelSpec kolmogorov2_model();
/// Three-chain B with sizes (1,1,1), A = 1, D = R^3.
ModelSpec kolmogorov3_model();
/// Kolmogorov B in d = 2 with a_11 = 1 + sin(x_1)/2.
ModelSpec perturbed_model();

struct ModelEntry {
  std::string name;
  std::string description;
  std::function<ModelSpec()> make;
};

/// asian, kolmogorov2, kolmogorov3, perturbed.
std::vector<ModelEntry> builtin_models(double asian_floor = 0.1);
ModelSpec make_builtin(const std::string& name, double asian_floor = 0.1);

struct CoercivityCheck {
  double min_ratio = 0.0;  // min <A xi, xi> / |xi|^2
  double max_ratio = 0.0;
  int points = 0;
  bool holds = false;  // 1/M <= min_ratio and max_ratio <= M
};

/// Samples points of D inside `box` and random directions.
CoercivityCheck check_coercivity(const ModelSpec& model, const SpaceTimeBox& box, int n,
                                 std::uint64_t seed);

/// 0.5 * dist(x, boundary of D), capped at 1 when D is unbounded in every
/// direction from x.
double default_delta(const ModelSpec& model, const Vector& x);

/// Reference level M_ref = trace A(t, x) / p0 (1 when that is not positive).
double reference_level(const ModelSpec& model, double t, const Vector& x);

/// Cv(s) of the constant-coefficient kernel with level reference_level(t, x).
/// Throws SingularCovariance when (B, p0) is not hypoelliptic.
Matrix reference_covariance(const ModelSpec& model, double t, const Vector& x, double s);

}  // namespace hypodiff
