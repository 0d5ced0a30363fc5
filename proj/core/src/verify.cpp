#include "hypodiff/verify.hpp"

#include <cmath>
#include <limits>

#include "hypodiff/error.hpp"
#include "hypodiff/geometry.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/parallel.hpp"

namespace hypodiff {

namespace {

/// Per-path samples of several quantities, reduced to mean and SE in a fixed
/// order.
class PathSamples {
 public:
  PathSamples(std::size_t quantities, std::size_t n_paths)
      : n_(n_paths), values_(quantities, std::vector<double>(n_paths, 0.0)) {}

  double& at(std::size_t q, std::size_t path) { return values_[q][path]; }
  MeanSe reduce(std::size_t q) const { return mean_se(values_[q]); }
  const std::vector<double>& column(std::size_t q) const { return values_[q]; }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> values_;
};

LimitReport make_report(std::string name, Shape shape, int rows, int cols, const PathSamples& s,
                        std::size_t first, double elapsed, const McOptions& opts) {
  LimitReport r;
  r.name = std::move(name);
  r.shape = shape;
  r.estimate.resize(rows, cols);
  r.std_error.resize(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const MeanSe m = s.reduce(first + static_cast<std::size_t>(i) * cols + j);
      r.estimate(i, j) = m.mean;
      r.std_error(i, j) = m.se;
    }
  }
  r.elapsed = elapsed;
  r.n_paths = opts.n_paths;
  r.seed = opts.seed;
  return r;
}

void check_common(const ModelSpec& model, double t, const Vector& x, double T, double delta,
                  const McOptions& opts) {
  require(x.size() == model.d, ErrorKind::DimensionMismatch, "start point has wrong dimension");
  require(model.domain.contains(x), ErrorKind::StartOutsideRegion, "start point outside D");
  require(T > t, ErrorKind::NonPositiveElapsed, "T must exceed t");
  require(delta > 0.0, ErrorKind::InvalidArgument, "delta must be positive");
  require(opts.n_paths >= 2, ErrorKind::InvalidArgument, "at least two paths are required");
}

nlohmann::json matrix_json(const Matrix& m, Shape shape) {
  if (shape == Shape::Scalar) return m(0, 0);
  if (shape == Shape::Vector) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(m(i, 0));
    return a;
  }
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

}  // namespace

bool LimitReport::within_se(double k) const {
  require(target.has_value(), ErrorKind::InvalidArgument, "report has no target");
  for (Eigen::Index i = 0; i < estimate.rows(); ++i)
    for (Eigen::Index j = 0; j < estimate.cols(); ++j)
      if (!(std::abs(estimate(i, j) - (*target)(i, j)) <= k * std_error(i, j))) return false;
  return true;
}

nlohmann::json to_json(const LimitReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["estimate"] = matrix_json(r.estimate, r.shape);
  j["se"] = matrix_json(r.std_error, r.shape);
  j["target"] = r.target ? matrix_json(*r.target, r.shape) : nlohmann::json(nullptr);
  j["elapsed"] = r.elapsed;
  j["n_paths"] = r.n_paths;
  j["seed"] = r.seed;
  return j;
}

GeneratorLimits generator_limits(const ModelSpec& model, double t, const Vector& x, double T,
                                 double delta, const McOptions& opts, double m) {
  check_common(model, t, x, T, delta, opts);
  require(m >= 1.0, ErrorKind::InvalidArgument, "tail exponent m must be >= 1");
  const int d = model.d;
  const int p0 = model.p0;
  const double s = T - t;
  const Vector mean = mat_exp(model.B, s) * x;
  const std::size_t q_tail = 0;
  const std::size_t q_first = 1;
  const std::size_t q_second = q_first + p0;
  const std::size_t q_full = q_second + static_cast<std::size_t>(p0) * p0;
  const std::size_t q_qn = q_full + static_cast<std::size_t>(d) * d;
  const std::size_t q_qp = q_qn + 1;
  const double power = 2.0 + model.alpha;
  PathSamples samples(q_qp + 1, opts.n_paths);
  const double tail_scale = std::pow(s, m);

  for_each_path(model, t, x, T, opts.simulation(), [&](std::size_t p, const PathView& v) {
    const Vector xT = v.final_state();
    const Vector raw = xT - x;
    if (raw.norm() > delta) {
      samples.at(q_tail, p) = 1.0 / tail_scale;
    }
    if (!(raw.norm() < delta)) return;
    const Vector c = xT - mean;
    for (int i = 0; i < p0; ++i) samples.at(q_first + i, p) = c(i) / s;
    for (int i = 0; i < p0; ++i)
      for (int j = 0; j < p0; ++j) samples.at(q_second + i * p0 + j, p) = c(i) * c(j) / s;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) samples.at(q_full + i * d + j, p) = raw(i) * raw(j) / s;
    const double qn = quasi_norm(c, model.structure);
    samples.at(q_qn, p) = qn * qn / s;
    samples.at(q_qp, p) = std::pow(qn, power) / s;
  });

  GeneratorLimits out;
  out.tail = make_report("tail_mass", Shape::Scalar, 1, 1, samples, q_tail, s, opts);
  out.tail.target = Matrix::Zero(1, 1);
  out.first = make_report("generator_limit_first", Shape::Vector, p0, 1, samples, q_first, s, opts);
  out.first.target = model.drift_at(t, x);
  out.second =
      make_report("generator_limit_second", Shape::Matrix, p0, p0, samples, q_second, s, opts);
  const Matrix A = model.diffusion_at(t, x);
  out.second.target = A;
  out.full = make_report("generator_limit_second_full", Shape::Matrix, d, d, samples, q_full, s,
                         opts);
  Matrix full_target = Matrix::Zero(d, d);
  full_target.topLeftCorner(p0, p0) = A;
  out.full.target = full_target;
  out.quasi_norm = make_report("quasi_norm_limit", Shape::Scalar, 1, 1, samples, q_qn, s, opts);
  out.quasi_power =
      make_report("quasi_norm_power_limit", Shape::Scalar, 1, 1, samples, q_qp, s, opts);
  out.quasi_power.target = Matrix::Zero(1, 1);
  return out;
}

LimitReport tail_mass(const ModelSpec& model, double t, const Vector& x, double T, double delta,
                      double m, const McOptions& opts, const StatePredicate& H) {
  check_common(model, t, x, T, delta, opts);
  require(m >= 1.0, ErrorKind::InvalidArgument, "tail exponent m must be >= 1");
  const double scale = std::pow(T - t, m);
  PathSamples samples(1, opts.n_paths);
  for_each_path(model, t, x, T, opts.simulation(), [&](std::size_t p, const PathView& v) {
    const auto xT = v.final_state();
    if ((xT - x).norm() > delta && (!H || H(xT))) samples.at(0, p) = 1.0 / scale;
  });
  LimitReport r = make_report(H ? "tail_mass_restricted" : "tail_mass", Shape::Scalar, 1, 1,
                              samples, 0, T - t, opts);
  r.target = Matrix::Zero(1, 1);
  return r;
}

LimitReport generator_limit_first(const ModelSpec& model, double t, const Vector& x, double T,
                                  double delta, const McOptions& opts) {
  return generator_limits(model, t, x, T, delta, opts).first;
}

SecondLimit generator_limit_second(const ModelSpec& model, double t, const Vector& x, double T,
                                   double delta, const McOptions& opts) {
  GeneratorLimits g = generator_limits(model, t, x, T, delta, opts);
  return {std::move(g.second), std::move(g.full)};
}

QuasiNormLimit quasi_norm_limit(const ModelSpec& model, double t, const Vector& x, double T,
                                double delta, const McOptions& opts) {
  GeneratorLimits g = generator_limits(model, t, x, T, delta, opts);
  return {std::move(g.quasi_norm), std::move(g.quasi_power)};
}

nlohmann::json to_json(const ItoReport& r) {
  return {{"martingale_mean", r.martingale_mean}, {"martingale_se", r.martingale_se},
          {"max_abs_martingale", r.max_abs_martingale},
          {"qv_lhs", r.qv_lhs}, {"qv_lhs_se", r.qv_lhs_se},
          {"qv_rhs", r.qv_rhs}, {"qv_rhs_se", r.qv_rhs_se},
          {"qv_se", r.qv_se},   {"n_used", r.n_used},
          {"n_paths", r.n_paths}, {"elapsed", r.elapsed},
          {"dt", r.dt},         {"seed", r.seed}};
}

ItoReport ito_check(const ModelSpec& model, const SmoothFunction& f, double t, const Vector& x,
                    double T, const McOptions& opts) {
  check_common(model, t, x, T, 1.0, opts);
  require(static_cast<bool>(f.value) && static_cast<bool>(f.gradient) &&
              static_cast<bool>(f.hessian) && static_cast<bool>(f.drift_derivative),
          ErrorKind::InvalidArgument, "ito_check needs value, gradient, hessian and Yf");
  const int p0 = model.p0;
  const double s = T - t;
  const Vector mean = mat_exp(model.B, s) * x;
  Vector sd = Vector::Constant(model.d, std::numeric_limits<double>::infinity());
  try {
    sd = reference_covariance(model, t, x, s).diagonal().cwiseSqrt();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularCovariance) throw;
  }
  const double f0 = f.value(t, x);

  // Quantities: 0 M, 1 M^2, 2 rhs, 3 M^2 - rhs, 4 kept flag.
  PathSamples samples(5, opts.n_paths);
  double dt_used = 0.0;
  for_each_path(model, t, x, T, opts.simulation(), [&](std::size_t p, const PathView& v) {
    const auto xT = v.final_state();
    for (int i = 0; i < model.d; ++i) {
      if (std::abs(xT(i) - mean(i)) > 20.0 * sd(i)) return;
    }
    double integral = 0.0;
    double qv = 0.0;
    Vector xk(model.d);
    for (int k = 0; k < v.n_steps; ++k) {
      const double tk = v.time(k);
      xk = v.state(k);
      const Matrix A = model.diffusion_at(tk, xk);
      const Vector a = model.drift_at(tk, xk);
      const Vector g = f.gradient(tk, xk).head(p0);
      const Matrix Hm = f.hessian(tk, xk).topLeftCorner(p0, p0);
      const double Lf =
          0.5 * (A.cwiseProduct(Hm)).sum() + a.dot(g) + f.drift_derivative(tk, xk);
      integral += Lf * v.dt;
      qv += g.dot(A * g) * v.dt;
    }
    const double M = f.value(v.time(v.n_steps), Vector(xT)) - f0 - integral;
    samples.at(0, p) = M;
    samples.at(1, p) = M * M;
    samples.at(2, p) = qv;
    samples.at(3, p) = M * M - qv;
    samples.at(4, p) = 1.0;
  });
  dt_used = plan_steps(t, T, opts.dt).dt;

  // Reduce over the kept paths only, in path order.
  std::vector<double> cols[4];
  const auto& kept = samples.column(4);
  double max_abs = 0.0;
  for (std::size_t p = 0; p < opts.n_paths; ++p) {
    if (kept[p] == 0.0) continue;
    for (int q = 0; q < 4; ++q) cols[q].push_back(samples.column(q)[p]);
    max_abs = std::max(max_abs, std::abs(samples.column(0)[p]));
  }
  require(cols[0].size() >= 2, ErrorKind::NoSurvivors, "fewer than two paths kept");
  ItoReport r;
  const MeanSe m = mean_se(cols[0]);
  const MeanSe lhs = mean_se(cols[1]);
  const MeanSe rhs = mean_se(cols[2]);
  const MeanSe diff = mean_se(cols[3]);
  r.martingale_mean = m.mean;
  r.martingale_se = m.se;
  r.max_abs_martingale = max_abs;
  r.qv_lhs = lhs.mean;
  r.qv_lhs_se = lhs.se;
  r.qv_rhs = rhs.mean;
  r.qv_rhs_se = rhs.se;
  r.qv_se = diff.se;
  r.n_used = cols[0].size();
  r.n_paths = opts.n_paths;
  r.elapsed = s;
  r.dt = dt_used;
  r.seed = opts.seed;
  return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument,
          "line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::InvalidArgument, "line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

nlohmann::json to_json(const MomentScaling& r) {
  return {{"q", r.q},       {"elapsed", r.elapsed},     {"moments", r.moments},
          {"se", r.std_errors}, {"slope", r.slope}, {"intercept", r.intercept}};
}

MomentScaling moment_scaling(const ModelSpec& model, double t, const Vector& x, int q,
                             const std::vector<double>& elapsed_grid, const McOptions& opts) {
  require(q == 2 || q == 4, ErrorKind::InvalidArgument, "q must be 2 or 4");
  require(elapsed_grid.size() >= 2, ErrorKind::InvalidArgument,
          "elapsed grid needs at least two points");
  require(x.size() == model.d, ErrorKind::DimensionMismatch, "start point has wrong dimension");
  MomentScaling out;
  out.q = q;
  std::vector<double> lx, ly;
  for (std::size_t g = 0; g < elapsed_grid.size(); ++g) {
    const double h = elapsed_grid[g];
    require(h > 0.0, ErrorKind::NonPositiveElapsed, "elapsed times must be positive");
    McOptions o = opts;
    o.dt = std::min(opts.dt, h / 20.0);
    o.stream = opts.stream + 1 + g;
    PathSamples samples(1, opts.n_paths);
    for_each_path(model, t, x, t + h, o.simulation(), [&](std::size_t p, const PathView& v) {
      const double r = (v.final_state() - x).norm();
      samples.at(0, p) = std::pow(r, q);
    });
    const MeanSe m = samples.reduce(0);
    out.elapsed.push_back(h);
    out.moments.push_back(m.mean);
    out.std_errors.push_back(m.se);
    require(m.mean > 0.0, ErrorKind::DegenerateCloud, "zero moment; cannot fit a slope");
    lx.push_back(std::log(h));
    ly.push_back(std::log(m.mean));
  }
  const LineFit fit = fit_line(lx, ly);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  return out;
}

UniformityProbe uniformity_probe(const ModelSpec& model, double t,
                                 const std::vector<Vector>& points, double T, double delta,
                                 const McOptions& opts) {
  require(points.size() >= 2, ErrorKind::InvalidArgument, "probe needs at least two points");
  UniformityProbe out;
  out.points = points;
  for (std::size_t k = 0; k < points.size(); ++k) {
    McOptions o = opts;
    o.stream = opts.stream + 1 + k;
    const SecondLimit g = generator_limit_second(model, t, points[k], T, delta, o);
    const double err = g.reduced.estimate(0, 0) - (*g.reduced.target)(0, 0);
    const double se = g.reduced.std_error(0, 0);
    out.errors.push_back(std::sqrt(err * err + se * se));
  }
  const auto [lo, hi] = std::minmax_element(out.errors.begin(), out.errors.end());
  out.ratio = *lo > 0.0 ? *hi / *lo : (*hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  return out;
}

}  // namespace hypodiff
