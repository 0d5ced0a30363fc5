#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypodiff/kernel.hpp"
#include "hypodiff/model.hpp"
#include "hypodiff/simulate.hpp"
#include "hypodiff/types.hpp"
#include "hypodiff/verify.hpp"

namespace hypodiff {

/// Shape of the Gaussian smoothing kernel.
///  Product:    diagonal bandwidths h_i = c sqrt(Cv_ref(s)_ii).
///  Covariance: kernel covariance c^2 Cv_ref(s).
/// Both scale like s^{(2j+1)/2} in block j since Cv(s) = D(sqrt s) Cv(1) D(sqrt s)
/// for nilpotent B.
enum class KdeKernel { Product, Covariance };

struct KdeOptions {
  double bandwidth = 0.12;  // relative factor c
  KdeKernel kernel = KdeKernel::Covariance;
  /// Optional explicit per-coordinate bandwidths (Product kernel only).
  std::optional<Vector> explicit_bandwidths;
};

struct DensityEstimate {
  std::vector<Vector> grid;
  std::vector<double> values;
  std::vector<double> std_errors;
  double bandwidth = 0.0;   // relative factor c
  Matrix kernel_covariance;  // covariance of the smoothing kernel
  std::size_t n_effective = 0;
  std::size_t n_paths = 0;
  double elapsed = 0.0;
  std::uint64_t seed = 0;
};

/// Columns x1..xd,value,se with 17 significant digits.
void write_csv(const DensityEstimate& est, std::ostream& out);
nlohmann::json to_json(const DensityEstimate& est);

/// Tensor grid with counts[i] nodes on [lo_i, hi_i] (endpoints included).
std::vector<Vector> rectangular_grid(const Vector& lo, const Vector& hi,
                                     const std::vector<int>& counts);

/// Nodes of the central half x0 + (S_eps - x0)/2 of S_eps lying within
/// Mahalanobis radius `radius` of `mean` for covariance `cov`, on a lattice
/// with `per_axis` nodes per principal direction.
std::vector<Vector> central_kernel_grid(const Cylinder& S, const Vector& mean, const Matrix& cov,
                                        double radius, int per_axis);

/// True when the (open) cylinder lies inside D.
bool cylinder_inside(const Cylinder& S, const Domain& D);

/// Smoothing kernel covariance for elapsed time s from (t, x).
Matrix kde_kernel_covariance(const ModelSpec& model, double t, const Vector& x, double s,
                             const KdeOptions& kde);

/// Survivor KDE of the Green function: samples X_T from paths that never left
/// S_eps on the grid, normalised by the total path count.
DensityEstimate green_estimate(const ModelSpec& model, const Cylinder& S, double t,
                               const Vector& x, double T, const std::vector<Vector>& grid,
                               const KdeOptions& kde, const McOptions& opts);

struct SeriesOptions {
  Cylinder cylinder;
  Ball inner;
  int n_max = 4;
};

struct LocalDensity {
  DensityEstimate kde;  // all endpoints in D
  /// Localization terms E[G(sigma_n, X_sigma_n; T, .) 1{sigma_n < T}] by
  /// restarting absorbed paths at (sigma_n, X_sigma_n), n = 1..n_max.
  std::vector<DensityEstimate> terms;
  std::optional<DensityEstimate> series;  // sum of the terms
  double sup_discrepancy = 0.0;           // max |series - kde| over the grid
};

LocalDensity local_density_estimate(const ModelSpec& model, double t, const Vector& x, double T,
                                    const std::vector<Vector>& grid, const KdeOptions& kde,
                                    const McOptions& opts,
                                    const std::optional<SeriesOptions>& series = std::nullopt);

struct SeriesReport {
  std::vector<double> probs;  // P(sigma_n < T), n = 1..n_max
  std::vector<double> probs_se;
  std::vector<double> tau_probs;  // P(tau_n < T)
  std::vector<double> tau_probs_se;
  double partial_sum = 0.0;
  double ratio_fit = 0.0;  // exp(slope) of log P(tau_n < T) vs n; NaN if unresolved
  std::size_t n_paths = 0;
  double elapsed = 0.0;
  std::uint64_t seed = 0;
};
nlohmann::json to_json(const SeriesReport& r);

SeriesReport localization_series(const ModelSpec& model, const Cylinder& S, const Ball& V,
                                 double t, const Vector& x, double T, int n_max,
                                 const McOptions& opts);

struct ExitDecay {
  std::vector<double> elapsed;
  std::vector<double> probs;
  std::vector<double> probs_se;
  std::vector<bool> used;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool unresolved = false;  // fewer than three usable points
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};
nlohmann::json to_json(const ExitDecay& r);

/// P(tau < s) from (0, x) for every s on the grid (step s/400, capped at
/// opts.dt), and the fit of log P against -1/s on points with
/// 10/n_paths < P <= 0.5.
ExitDecay exit_decay(const ModelSpec& model, const Cylinder& S, const Vector& x,
                     const std::vector<double>& elapsed_grid, const McOptions& opts);

using Payoff = std::function<double(const Vector&)>;

struct BackwardResidual {
  double residual = 0.0;  // signed
  double se = 0.0;        // 0 for the exact route
  double u = 0.0;         // u(t, x)
};

/// L u for u(t, x) = int phi(xi) Gamma_M(t, x; T, xi) dxi evaluated by
/// tensor Gauss-Hermite quadrature with `nodes` points per axis.
BackwardResidual backward_residual_exact(const GaussianKernelParams& params, const Payoff& phi,
                                         double T, double t, const Vector& x, double h,
                                         int nodes = 40);

/// L u with u = E phi(X_T) by Monte Carlo under common random numbers: every
/// stencil node uses the same paths and `n_steps` Euler steps.
BackwardResidual backward_residual_mc(const ModelSpec& model, const Payoff& phi, double T,
                                      double t, const Vector& x, double h, int n_steps,
                                      const McOptions& opts);

/// Absolute forward residual |K* Gamma| of the exact kernel in (T, xi).
double forward_residual(const GaussianKernelParams& params, double t, const Vector& x, double T,
                        const Vector& xi, double h);

}  // namespace hypodiff
