#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypodiff/calculus.hpp"
#include "hypodiff/model.hpp"
#include "hypodiff/simulate.hpp"
#include "hypodiff/types.hpp"

namespace hypodiff {

/// Monte Carlo settings shared by the estimators.
struct McOptions {
  double dt = 1e-4;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  unsigned threads = 0;

  SimulationOptions simulation() const { return {dt, n_paths, seed, stream, threads}; }
};

enum class Shape { Scalar, Vector, Matrix };

/// Sample-mean estimate of a limit quantity with its standard error.
struct LimitReport {
  std::string name;
  Shape shape = Shape::Scalar;
  Matrix estimate;  // 1x1, n x 1 or n x m
  Matrix std_error;
  std::optional<Matrix> target;
  double elapsed = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  double value() const { return estimate(0, 0); }
  double se() const { return std_error(0, 0); }
  /// |estimate - target| <= k * se entry-wise (requires a target).
  bool within_se(double k) const;
};

/// {name, estimate, se, target, elapsed, n_paths, seed}; scalars as numbers,
/// vectors as arrays, matrices as arrays of rows; target null when absent.
nlohmann::json to_json(const LimitReport& r);

/// All limit quantities from one ensemble started at (t, x):
/// tail        P(|X_T - x| > delta) / (T - t)^m
/// first       E[(X_T - e^{sB}x)_i 1{|X_T - x| < delta}] / s,  i <= p0
/// second      E[(X_T - e^{sB}x)_i (X_T - e^{sB}x)_j 1{...}] / s,  i, j <= p0
/// full        E[(X_T - x)_i (X_T - x)_j 1{...}] / s,  all i, j
/// quasi_norm  E[|X_T - e^{sB}x|_B^2 1{...}] / s
/// quasi_power E[|X_T - e^{sB}x|_B^{2+alpha} 1{...}] / s
struct GeneratorLimits {
  LimitReport tail;
  LimitReport first;
  LimitReport second;
  LimitReport full;
  LimitReport quasi_norm;
  LimitReport quasi_power;
};

GeneratorLimits generator_limits(const ModelSpec& model, double t, const Vector& x, double T,
                                 double delta, const McOptions& opts, double m = 1.0);

/// P(|X_T - x| > delta [, X_T in H]) / (T - t)^m. Without H the unrestricted
/// tail is estimated.
LimitReport tail_mass(const ModelSpec& model, double t, const Vector& x, double T, double delta,
                      double m, const McOptions& opts, const StatePredicate& H = {});

LimitReport generator_limit_first(const ModelSpec& model, double t, const Vector& x, double T,
                                  double delta, const McOptions& opts);

struct SecondLimit {
  LimitReport reduced;  // p0 x p0, target a_ij(t, x)
  LimitReport full;     // d x d, target diag(A, 0)
};
SecondLimit generator_limit_second(const ModelSpec& model, double t, const Vector& x, double T,
                                   double delta, const McOptions& opts);

struct QuasiNormLimit {
  LimitReport squared;
  LimitReport power;  // exponent 2 + alpha
};
QuasiNormLimit quasi_norm_limit(const ModelSpec& model, double t, const Vector& x, double T,
                                double delta, const McOptions& opts);

/// Intrinsic Ito check along Euler paths:
/// M = f(T, X_T) - f(t, x) - sum_k Lf(t_k, X_k) dt (left endpoint),
/// Lf = 1/2 sum a_ij d_ij f + sum a_i d_i f + Yf, and both sides of
/// E[M^2] = E[sum_k <A grad f, grad f>(t_k, X_k) dt]. Paths whose endpoint
/// leaves the +-20 standard deviation box of the reference kernel are
/// discarded.
struct ItoReport {
  double martingale_mean = 0.0;
  double martingale_se = 0.0;
  double max_abs_martingale = 0.0;
  double qv_lhs = 0.0;
  double qv_lhs_se = 0.0;
  double qv_rhs = 0.0;
  double qv_rhs_se = 0.0;
  double qv_se = 0.0;  // SE of the per-path difference M^2 - rhs
  std::size_t n_used = 0;
  std::size_t n_paths = 0;
  double elapsed = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
};
nlohmann::json to_json(const ItoReport& r);

ItoReport ito_check(const ModelSpec& model, const SmoothFunction& f, double t, const Vector& x,
                    double T, const McOptions& opts);

/// Slope of log E|X_{s+h} - x|^q against log h over the elapsed grid, with
/// X_s = x and step min(dt, h/20).
struct MomentScaling {
  int q = 2;
  std::vector<double> elapsed;
  std::vector<double> moments;
  std::vector<double> std_errors;
  double slope = 0.0;
  double intercept = 0.0;
};
nlohmann::json to_json(const MomentScaling& r);

MomentScaling moment_scaling(const ModelSpec& model, double t, const Vector& x, int q,
                             const std::vector<double>& elapsed_grid, const McOptions& opts);

/// Second-order generator errors at several points of a compact H:
/// error_k = sqrt(|a_hat_11 - a_11|^2 + se^2); ratio = max / min.
struct UniformityProbe {
  std::vector<Vector> points;
  std::vector<double> errors;
  double ratio = 0.0;
};
UniformityProbe uniformity_probe(const ModelSpec& model, double t,
                                 const std::vector<Vector>& points, double T, double delta,
                                 const McOptions& opts);

/// Least-squares line y = slope x + intercept, with R^2.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hypodiff
