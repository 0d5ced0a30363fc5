#include "hypodiff/calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "hypodiff/error.hpp"
#include "hypodiff/matrix_exponential.hpp"

namespace hypodiff {
namespace {

constexpr double kRemainderFloor = 1e-13;
constexpr int kMinFitPoints = 8;
constexpr int kDeltaGridSize = 64;
constexpr double kDeltaGridMin = 1e-6;

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

int nth_prime(int k) {
  static constexpr std::array<int, 16> primes{2, 3, 5, 7, 11, 13, 17, 19,
                                              23, 29, 31, 37, 41, 43, 47, 53};
  require(k < static_cast<int>(primes.size()), ErrorKind::InvalidArgument,
          "Halton sequence dimension too large");
  return primes[k];
}

std::vector<double> delta_grid() {
  std::vector<double> grid(kDeltaGridSize);
  for (int k = 0; k < kDeltaGridSize; ++k) {
    grid[k] = std::pow(kDeltaGridMin, static_cast<double>(kDeltaGridSize - 1 - k) /
                                          (kDeltaGridSize - 1));
  }
  return grid;  // ascending, grid.back() == 1
}

double powi(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

JetSpec::JetSpec(SpaceTimePoint base, int order, double alpha, BlockStructure structure)
    : base_(std::move(base)), order_(order), alpha_(alpha), structure_(std::move(structure)) {
  require(order_ >= 0, ErrorKind::InvalidArgument, "jet order must be nonnegative");
  require(alpha_ > 0.0 && alpha_ <= 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  require(base_.x.size() == structure_.d(), ErrorKind::DimensionMismatch,
          "base point dimension differs from d");
}

void JetSpec::set(int k, const MultiIndex& beta, double value) {
  require(k >= 0 && beta.size() == structure_.d(), ErrorKind::InvalidArgument, "bad jet key");
  require(2 * k + multi_index_height(beta, structure_) <= order_, ErrorKind::InvalidArgument,
          "pair (k, beta) exceeds the jet order");
  entries_[JetKey{k, beta}] = value;
}

bool JetSpec::complete() const { return missing().empty(); }

std::vector<JetKey> JetSpec::missing() const {
  std::vector<JetKey> out;
  for (auto& [k, beta] : admissible_pairs(order_, structure_)) {
    JetKey key{k, beta};
    if (!entries_.contains(key)) out.push_back(std::move(key));
  }
  return out;
}

double lie_derivative_Y(const ScalarField& f, double t, const Vector& x, const Matrix& B,
                        double delta) {
  require(delta > 0.0, ErrorKind::InvalidArgument, "delta must be positive");
  const Vector fwd = mat_exp(B, delta) * x;
  const Vector bwd = mat_exp(B, -delta) * x;
  return (f(t + delta, fwd) - f(t - delta, bwd)) / (2.0 * delta);
}

double taylor_eval(const JetSpec& jet, double t, const Vector& x, const Matrix& B,
                   const BlockStructure& s) {
  require(jet.structure() == s, ErrorKind::InvalidArgument, "jet built for another structure");
  if (!jet.complete()) fail(ErrorKind::IncompleteJet, "jet lacks admissible entries");
  const double dt = t - jet.base().t;
  const Vector z = x - mat_exp(B, dt) * jet.base().x;
  double total = 0.0;
  for (const auto& [key, value] : jet.entries()) {
    double term = value / (std::tgamma(key.k + 1.0) * key.beta.factorial());
    term *= powi(dt, key.k);
    for (int i = 0; i < s.d(); ++i) term *= powi(z(i), key.beta.exponents[i]);
    total += term;
  }
  return total;
}

RemainderFit remainder_order_fit(const ScalarField& f, const JetSpec& jet,
                                 const std::vector<SpaceTimePoint>& cloud, const Matrix& B,
                                 const BlockStructure& s) {
  std::vector<double> lx, ly;
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  bool any_nonzero = false;
  for (const auto& p : cloud) {
    const double rem = std::abs(f(p.t, p.x) - taylor_eval(jet, p.t, p.x, B, s));
    const double dist = intrinsic_distance(jet.base().t, jet.base().x, p.t, p.x, B, s);
    if (rem < kRemainderFloor) continue;
    any_nonzero = true;
    if (dist <= 0.0) continue;
    lx.push_back(std::log(dist));
    ly.push_back(std::log(rem));
    dmin = std::min(dmin, dist);
    dmax = std::max(dmax, dist);
  }
  RemainderFit fit;
  if (!any_nonzero) {
    fit.exact_reproduction = true;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const int n = static_cast<int>(lx.size());
  if (n < kMinFitPoints) fail(ErrorKind::DegenerateCloud, "fewer than 8 usable cloud points");
  if (dmax < 100.0 * dmin) fail(ErrorKind::DegenerateCloud, "cloud spans less than two decades");

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.used = n;
  fit.min_distance = dmin;
  fit.max_distance = dmax;
  return fit;
}

std::vector<SpaceTimePoint> intrinsic_cloud(const SpaceTimePoint& base, const Matrix& B,
                                            const BlockStructure& s, double r_min, double r_max,
                                            int count, std::uint64_t seed) {
  require(r_min > 0.0 && r_max > r_min && count > 0, ErrorKind::InvalidArgument,
          "bad cloud parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> logr(std::log(r_min), std::log(r_max));
  std::vector<SpaceTimePoint> cloud;
  cloud.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double r = std::exp(logr(rng));
    const double dt = r * r * unit(rng);
    Vector u(s.d());
    for (int i = 0; i < s.d(); ++i) u(i) = unit(rng);
    cloud.push_back({base.t + dt, mat_exp(B, dt) * base.x + dilation(r, u, s)});
  }
  return cloud;
}

SpaceTimePoint integral_curve(const Direction& dir, double delta, double t, const Vector& x,
                              const Matrix& B) {
  if (dir.kind == Direction::Kind::Drift) return {t + delta, mat_exp(B, delta) * x};
  Vector y = x;
  y(dir.index) += delta;
  return {t, y};
}

bool SpaceTimeBox::contains(double t, const Vector& x) const {
  if (t < t_lo || t > t_hi) return false;
  for (int i = 0; i < x.size(); ++i)
    if (x(i) < x_lo(i) || x(i) > x_hi(i)) return false;
  return true;
}

bool SpaceTimeBox::empty() const {
  if (!(t_hi >= t_lo) || x_lo.size() != x_hi.size() || x_lo.size() == 0) return true;
  return (x_hi - x_lo).minCoeff() < 0.0;
}

double delta_V(const SpaceTimeBox& V, const SpaceTimePredicate& Q, const Matrix& B, int p0) {
  if (V.empty()) fail(ErrorKind::EmptyRegion, "region V is empty");
  const int d = static_cast<int>(V.x_lo.size());
  require(B.rows() == d && p0 >= 1 && p0 <= d, ErrorKind::DimensionMismatch, "bad sizes");

  std::vector<SpaceTimePoint> probes;
  const int corners = 1 << (d + 1);
  for (int c = 0; c < corners; ++c) {
    SpaceTimePoint p{(c & 1) ? V.t_hi : V.t_lo, Vector(d)};
    for (int i = 0; i < d; ++i) p.x(i) = (c >> (i + 1) & 1) ? V.x_hi(i) : V.x_lo(i);
    probes.push_back(std::move(p));
  }
  for (const auto& h : holder_samples(V, 1.0, 256)) probes.push_back({h.t, h.x});

  std::vector<Direction> dirs;
  for (int i = 0; i < p0; ++i) dirs.push_back(Direction::spatial(i));
  dirs.push_back(Direction::drift());

  const std::vector<double> grid = delta_grid();
  int limit = kDeltaGridSize;  // number of admissible grid values (prefix)
  for (const auto& p : probes) {
    if (!Q(p.t, p.x)) fail(ErrorKind::EmptyRegion, "region V is not contained in Q");
    int ok = 0;
    for (; ok < limit; ++ok) {
      bool inside = true;
      for (const auto& dir : dirs) {
        for (double sgn : {1.0, -1.0}) {
          const SpaceTimePoint q = integral_curve(dir, sgn * grid[ok], p.t, p.x, B);
          if (!Q(q.t, q.x)) inside = false;
        }
      }
      if (!inside) break;
    }
    limit = ok;
    if (limit == 0) fail(ErrorKind::EmptyRegion, "no admissible delta: V touches the boundary of Q");
  }
  return grid[limit - 1];
}

std::vector<HolderSample> holder_samples(const SpaceTimeBox& V, double delta_max, int count) {
  if (V.empty()) fail(ErrorKind::EmptyRegion, "region V is empty");
  const int d = static_cast<int>(V.x_lo.size());
  std::vector<HolderSample> out;
  out.reserve(count);
  for (int k = 1; k <= count; ++k) {
    const auto idx = static_cast<std::uint64_t>(k);
    HolderSample h{V.t_lo + (V.t_hi - V.t_lo) * radical_inverse(idx, nth_prime(0)), Vector(d),
                   0.0};
    for (int i = 0; i < d; ++i)
      h.x(i) = V.x_lo(i) + (V.x_hi(i) - V.x_lo(i)) * radical_inverse(idx, nth_prime(i + 1));
    const double u = radical_inverse(idx, nth_prime(d + 1));
    h.delta = (k % 2 == 0 ? 1.0 : -1.0) * delta_max * u;
    out.push_back(std::move(h));
  }
  return out;
}

double holder_seminorm_on(const ScalarField& f, const Direction& dir, double alpha,
                          const Matrix& B, const std::vector<HolderSample>& samples) {
  const double power = dir.kind == Direction::Kind::Drift ? 0.5 * alpha : alpha;
  double sup = 0.0;
  for (const auto& h : samples) {
    if (h.delta == 0.0) continue;
    const SpaceTimePoint q = integral_curve(dir, h.delta, h.t, h.x, B);
    const double ratio = std::abs(f(q.t, q.x) - f(h.t, h.x)) / std::pow(std::abs(h.delta), power);
    sup = std::max(sup, ratio);
  }
  return sup;
}

double holder_seminorm(const ScalarField& f, const Direction& dir, double alpha,
                       const SpaceTimeBox& V, const SpaceTimePredicate& Q, const Matrix& B,
                       int p0, int n_samples) {
  require(dir.kind == Direction::Kind::Drift || (dir.index >= 0 && dir.index < p0),
          ErrorKind::InvalidArgument, "spatial direction must be one of the first p0");
  const double dv = delta_V(V, Q, B, p0);
  return holder_seminorm_on(f, dir, alpha, B, holder_samples(V, dv, n_samples));
}

}  // namespace hypodiff
