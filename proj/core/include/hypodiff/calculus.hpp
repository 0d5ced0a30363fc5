#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "hypodiff/geometry.hpp"
#include "hypodiff/types.hpp"

namespace hypodiff {

/// Deterministic scalar function f(t, x).
using ScalarField = std::function<double(double t, const Vector& x)>;

/// A function together with the derivatives the intrinsic Ito formula needs:
/// the first p0 partials, their p0 x p0 Hessian and the Lie derivative Yf.
struct SmoothFunction {
  ScalarField value;
  std::function<Vector(double, const Vector&)> gradient;
  std::function<Matrix(double, const Vector&)> hessian;
  ScalarField drift_derivative;
};

struct JetKey {
  int k = 0;
  MultiIndex beta;
  friend auto operator<=>(const JetKey&, const JetKey&) = default;
};

/// Values Y^k d^beta f(base) for every admissible pair 2k + [beta]_B <= order.
class JetSpec {
 public:
  JetSpec(SpaceTimePoint base, int order, double alpha, BlockStructure structure);

  /// Throws InvalidArgument for a pair outside the admissible set.
  void set(int k, const MultiIndex& beta, double value);

  const SpaceTimePoint& base() const noexcept { return base_; }
  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const BlockStructure& structure() const noexcept { return structure_; }
  const std::map<JetKey, double>& entries() const noexcept { return entries_; }

  bool complete() const;
  std::vector<JetKey> missing() const;

 private:
  SpaceTimePoint base_;
  int order_;
  double alpha_;
  BlockStructure structure_;
  std::map<JetKey, double> entries_;
};

/// (f(t+delta, e^{delta B} x) - f(t-delta, e^{-delta B} x)) / (2 delta).
double lie_derivative_Y(const ScalarField& f, double t, const Vector& x, const Matrix& B,
                        double delta);

/// n-th order intrinsic Taylor polynomial centred at jet.base(), evaluated at
/// (t, x). Throws IncompleteJet when an admissible entry is missing.
double taylor_eval(const JetSpec& jet, double t, const Vector& x, const Matrix& B,
                   const BlockStructure& s);

struct RemainderFit {
  double slope = 0.0;
  double intercept = 0.0;
  int used = 0;
  bool exact_reproduction = false;  // every remainder below 1e-13
  double min_distance = 0.0;
  double max_distance = 0.0;
};

/// Least-squares slope of log|f - T^(n)| against log intrinsic distance.
/// Throws DegenerateCloud for fewer than 8 usable points or a cloud spanning
/// less than two decades of distance.
RemainderFit remainder_order_fit(const ScalarField& f, const JetSpec& jet,
                                 const std::vector<SpaceTimePoint>& cloud, const Matrix& B,
                                 const BlockStructure& s);

/// Points (s + r^2 tau, e^{r^2 tau B} y + D_0(r) u) with r log-uniform in
/// [r_min, r_max], tau and u uniform in [-1, 1].
std::vector<SpaceTimePoint> intrinsic_cloud(const SpaceTimePoint& base, const Matrix& B,
                                            const BlockStructure& s, double r_min, double r_max,
                                            int count, std::uint64_t seed);

struct Direction {
  enum class Kind { Spatial, Drift };
  Kind kind = Kind::Spatial;
  int index = 0;

  static Direction spatial(int i) { return {Kind::Spatial, i}; }
  static Direction drift() { return {Kind::Drift, -1}; }
};

/// e^{delta X}(t, x) for X = d_{x_i} or X = Y.
SpaceTimePoint integral_curve(const Direction& dir, double delta, double t, const Vector& x,
                              const Matrix& B);

struct SpaceTimeBox {
  double t_lo = 0.0;
  double t_hi = 0.0;
  Vector x_lo;
  Vector x_hi;

  bool contains(double t, const Vector& x) const;
  bool empty() const;
};

using SpaceTimePredicate = std::function<bool(double, const Vector&)>;

/// delta_V: the largest delta <= 1 on a 64-point geometric grid such that the
/// integral curves of d_{x_1..x_p0} and Y from probe points of V stay in Q for
/// |delta'| <= delta. Throws EmptyRegion if V is empty or no grid value works.
double delta_V(const SpaceTimeBox& V, const SpaceTimePredicate& Q, const Matrix& B, int p0);

struct HolderSample {
  double t;
  Vector x;
  double delta;
};

/// Halton points in V x ]-delta_max, delta_max[.
std::vector<HolderSample> holder_samples(const SpaceTimeBox& V, double delta_max, int count);

/// sup over the samples of |f(e^{delta X}(t,x)) - f(t,x)| / |delta|^{alpha}
/// (spatial) or / |delta|^{alpha/2} (Y).
double holder_seminorm_on(const ScalarField& f, const Direction& dir, double alpha,
                          const Matrix& B, const std::vector<HolderSample>& samples);

double holder_seminorm(const ScalarField& f, const Direction& dir, double alpha,
                       const SpaceTimeBox& V, const SpaceTimePredicate& Q, const Matrix& B,
                       int p0, int n_samples = 10000);

}  // namespace hypodiff
