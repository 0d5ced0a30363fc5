#include "hypodiff/density.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hypodiff/error.hpp"
#include "hypodiff/format.hpp"
#include "hypodiff/kde.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/parallel.hpp"
#include "hypodiff/quadrature.hpp"

namespace hypodiff {

namespace {

Matrix whitening(const Matrix& kernel_cov) {
  const Eigen::LLT<Matrix> llt(kernel_cov);
  require(llt.info() == Eigen::Success, ErrorKind::SingularCovariance,
          "kernel covariance is not positive definite");
  const Matrix L = llt.matrixL();
  return L.triangularView<Eigen::Lower>().solve(Matrix::Identity(L.rows(), L.cols()));
}

void check_grid(const std::vector<Vector>& grid, int d) {
  require(!grid.empty(), ErrorKind::EmptyGrid, "evaluation grid is empty");
  for (const auto& g : grid)
    require(g.size() == d, ErrorKind::DimensionMismatch, "grid node has wrong dimension");
}

DensityEstimate assemble(const std::vector<Vector>& grid, const KdeResult& k, const KdeOptions& kde,
                         const Matrix& kernel_cov, std::size_t n_eff, const McOptions& opts,
                         double elapsed) {
  DensityEstimate e;
  e.grid = grid;
  e.values = k.values;
  e.std_errors = k.std_errors;
  e.bandwidth = kde.bandwidth;
  e.kernel_covariance = kernel_cov;
  e.n_effective = n_eff;
  e.n_paths = opts.n_paths;
  e.elapsed = elapsed;
  e.seed = opts.seed;
  return e;
}

bool stays_inside(const PathView& v, const Cylinder& S) {
  for (int k = 0; k <= v.n_steps; ++k)
    if (!S.contains(v.state(k))) return false;
  return true;
}

std::vector<Vector> compact(std::vector<std::optional<Vector>>& slots) {
  std::vector<Vector> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

}  // namespace

void write_csv(const DensityEstimate& est, std::ostream& out) {
  const int d = est.grid.empty() ? 0 : static_cast<int>(est.grid.front().size());
  for (int i = 0; i < d; ++i) out << 'x' << (i + 1) << ',';
  out << "value,se\n";
  for (std::size_t k = 0; k < est.grid.size(); ++k) {
    for (int i = 0; i < d; ++i) out << format_double(est.grid[k](i)) << ',';
    out << format_double(est.values[k]) << ',' << format_double(est.std_errors[k]) << '\n';
  }
}

nlohmann::json to_json(const DensityEstimate& est) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t k = 0; k < est.grid.size(); ++k) {
    nlohmann::json x = nlohmann::json::array();
    for (Eigen::Index i = 0; i < est.grid[k].size(); ++i) x.push_back(est.grid[k](i));
    nodes.push_back({{"x", x}, {"value", est.values[k]}, {"se", est.std_errors[k]}});
  }
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < est.kernel_covariance.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < est.kernel_covariance.cols(); ++j)
      row.push_back(est.kernel_covariance(i, j));
    cov.push_back(row);
  }
  return {{"bandwidth", est.bandwidth}, {"kernel_covariance", cov},
          {"n_effective", est.n_effective}, {"n_paths", est.n_paths},
          {"elapsed", est.elapsed},     {"seed", est.seed},
          {"nodes", nodes}};
}

std::vector<Vector> rectangular_grid(const Vector& lo, const Vector& hi,
                                     const std::vector<int>& counts) {
  const Eigen::Index d = lo.size();
  require(hi.size() == d && static_cast<Eigen::Index>(counts.size()) == d && d >= 1,
          ErrorKind::DimensionMismatch, "grid bounds and counts must agree in dimension");
  std::size_t total = 1;
  for (int c : counts) {
    require(c >= 1, ErrorKind::EmptyGrid, "grid counts must be positive");
    total *= static_cast<std::size_t>(c);
  }
  std::vector<Vector> out;
  out.reserve(total);
  std::vector<int> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vector x(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      x(i) = counts[i] == 1 ? 0.5 * (lo(i) + hi(i))
                            : lo(i) + (hi(i) - lo(i)) * idx[i] / (counts[i] - 1.0);
    }
    out.push_back(std::move(x));
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

std::vector<Vector> central_kernel_grid(const Cylinder& S, const Vector& mean, const Matrix& cov,
                                        double radius, int per_axis) {
  const Eigen::Index d = mean.size();
  require(S.x0.size() == d && cov.rows() == d && cov.cols() == d, ErrorKind::DimensionMismatch,
          "grid inputs disagree in dimension");
  require(radius > 0.0 && per_axis >= 2, ErrorKind::InvalidArgument,
          "radius must be positive and per_axis >= 2");
  const Matrix P = principal_axes(cov);
  const auto lattice = rectangular_grid(Vector::Constant(d, -radius), Vector::Constant(d, radius),
                                        std::vector<int>(d, per_axis));
  std::vector<Vector> out;
  for (const auto& u : lattice) {
    if (u.norm() > radius * (1.0 + 1e-12)) continue;
    const Vector xi = mean + P * u;
    if (S.contains(S.x0 + 2.0 * (xi - S.x0))) out.push_back(xi);
  }
  require(!out.empty(), ErrorKind::EmptyGrid, "no lattice node in the central half of S_eps");
  return out;
}

bool cylinder_inside(const Cylinder& S, const Domain& D) {
  if (S.x0.size() != D.d()) return false;
  for (Eigen::Index i = 0; i < S.x0.size(); ++i) {
    const double w = i == 0 ? S.half_width_axial() : S.half_width_transverse();
    if (!(S.x0(i) - w >= D.lower()(i) && S.x0(i) + w <= D.upper()(i))) return false;
  }
  return true;
}

Matrix kde_kernel_covariance(const ModelSpec& model, double t, const Vector& x, double s,
                             const KdeOptions& kde) {
  require(kde.bandwidth > 0.0, ErrorKind::InvalidArgument, "bandwidth must be positive");
  if (kde.explicit_bandwidths) {
    require(kde.kernel == KdeKernel::Product, ErrorKind::InvalidArgument,
            "explicit bandwidths need the product kernel");
    const Vector& h = *kde.explicit_bandwidths;
    require(h.size() == model.d && h.minCoeff() > 0.0, ErrorKind::InvalidArgument,
            "explicit bandwidths must be positive, one per coordinate");
    return h.cwiseProduct(h).asDiagonal();
  }
  const Matrix cv = reference_covariance(model, t, x, s);
  const double c2 = kde.bandwidth * kde.bandwidth;
  if (kde.kernel == KdeKernel::Covariance) return c2 * cv;
  return (c2 * cv.diagonal()).asDiagonal();
}

DensityEstimate green_estimate(const ModelSpec& model, const Cylinder& S, double t,
                               const Vector& x, double T, const std::vector<Vector>& grid,
                               const KdeOptions& kde, const McOptions& opts) {
  check_grid(grid, model.d);
  require(x.size() == model.d, ErrorKind::DimensionMismatch, "start point has wrong dimension");
  require(S.contains(x), ErrorKind::StartOutsideRegion, "start point outside S_eps");
  require(cylinder_inside(S, model.domain), ErrorKind::InvalidArgument, "S_eps must lie in D");
  for (const auto& g : grid)
    require(S.contains(g), ErrorKind::InvalidArgument, "grid node outside S_eps");
  require(opts.n_paths >= 2, ErrorKind::InvalidArgument, "at least two paths are required");

  std::vector<std::optional<Vector>> slots(opts.n_paths);
  for_each_path(model, t, x, T, opts.simulation(), [&](std::size_t p, const PathView& v) {
    if (stays_inside(v, S)) slots[p] = Vector(v.final_state());
  });
  const auto samples = compact(slots);
  require(!samples.empty(), ErrorKind::NoSurvivors, "every path left S_eps before T");
  const Matrix H = kde_kernel_covariance(model, t, x, T - t, kde);
  const KdeResult k = gaussian_kde(samples, opts.n_paths, grid, whitening(H), opts.threads);
  return assemble(grid, k, kde, H, samples.size(), opts, T - t);
}

LocalDensity local_density_estimate(const ModelSpec& model, double t, const Vector& x, double T,
                                    const std::vector<Vector>& grid, const KdeOptions& kde,
                                    const McOptions& opts,
                                    const std::optional<SeriesOptions>& series) {
  check_grid(grid, model.d);
  for (const auto& g : grid)
    require(model.domain.contains(g), ErrorKind::InvalidArgument, "grid node outside D");
  require(x.size() == model.d, ErrorKind::DimensionMismatch, "start point has wrong dimension");
  require(opts.n_paths >= 2, ErrorKind::InvalidArgument, "at least two paths are required");
  if (series) {
    check_inner_contained(series->cylinder, series->inner);
    require(series->n_max >= 1, ErrorKind::InvalidArgument, "n_max must be >= 1");
    require(cylinder_inside(series->cylinder, model.domain), ErrorKind::InvalidArgument,
            "S_eps must lie in D");
  }
  const int n_max = series ? series->n_max : 0;

  std::vector<std::optional<Vector>> slots(opts.n_paths);
  // restarts[n][p]: (sigma_{n+1}, X_sigma) when sigma_{n+1} < T.
  std::vector<std::vector<std::optional<PathStart>>> restarts(
      n_max, std::vector<std::optional<PathStart>>(opts.n_paths));
  for_each_path(model, t, x, T, opts.simulation(), [&](std::size_t p, const PathView& v) {
    const auto xT = v.final_state();
    if (model.domain.contains(xT)) slots[p] = Vector(xT);
    if (!series) return;
    const StoppingTimes st = localization_times(v, series->cylinder, series->inner);
    for (int n = 0; n < n_max && n < static_cast<int>(st.sigma.size()); ++n) {
      if (st.sigma_step[n] >= v.n_steps) break;
      restarts[n][p] = PathStart{st.sigma[n], Vector(v.state(st.sigma_step[n]))};
    }
  });
  const auto samples = compact(slots);
  const Matrix H = kde_kernel_covariance(model, t, x, T - t, kde);
  const Matrix W = whitening(H);

  LocalDensity out;
  const KdeResult full = gaussian_kde(samples, opts.n_paths, grid, W, opts.threads);
  out.kde = assemble(grid, full, kde, H, samples.size(), opts, T - t);
  if (!series) return out;

  DensityEstimate sum = out.kde;
  std::fill(sum.values.begin(), sum.values.end(), 0.0);
  std::fill(sum.std_errors.begin(), sum.std_errors.end(), 0.0);
  sum.n_effective = 0;
  for (int n = 0; n < n_max; ++n) {
    std::vector<PathStart> starts;
    for (auto& r : restarts[n])
      if (r) starts.push_back(std::move(*r));
    std::vector<std::optional<Vector>> term_slots(starts.size());
    if (!starts.empty()) {
      SimulationOptions so = opts.simulation();
      so.stream = opts.stream + 1000 + static_cast<std::uint64_t>(n);
      for_each_start(model, starts, T, so, [&](std::size_t p, const PathView& v) {
        if (stays_inside(v, series->cylinder)) term_slots[p] = Vector(v.final_state());
      });
    }
    const auto term_samples = compact(term_slots);
    KdeResult k;
    if (term_samples.empty()) {
      k.values.assign(grid.size(), 0.0);
      k.std_errors.assign(grid.size(), 0.0);
    } else {
      k = gaussian_kde(term_samples, opts.n_paths, grid, W, opts.threads);
    }
    out.terms.push_back(assemble(grid, k, kde, H, term_samples.size(), opts, T - t));
    for (std::size_t g = 0; g < grid.size(); ++g) {
      sum.values[g] += k.values[g];
      sum.std_errors[g] += k.std_errors[g] * k.std_errors[g];
    }
    sum.n_effective += term_samples.size();
  }
  for (auto& se : sum.std_errors) se = std::sqrt(se);
  double disc = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!series->cylinder.contains(grid[g])) continue;
    disc = std::max(disc, std::abs(sum.values[g] - out.kde.values[g]));
  }
  out.series = std::move(sum);
  out.sup_discrepancy = disc;
  return out;
}

nlohmann::json to_json(const SeriesReport& r) {
  return {{"probs", r.probs},         {"probs_se", r.probs_se},
          {"tau_probs", r.tau_probs}, {"tau_probs_se", r.tau_probs_se},
          {"partial_sum", r.partial_sum}, {"ratio_fit", r.ratio_fit},
          {"n_paths", r.n_paths},     {"elapsed", r.elapsed},
          {"seed", r.seed}};
}

SeriesReport localization_series(const ModelSpec& model, const Cylinder& S, const Ball& V,
                                 double t, const Vector& x, double T, int n_max,
                                 const McOptions& opts) {
  check_inner_contained(S, V);
  require(n_max >= 1, ErrorKind::InvalidArgument, "n_max must be >= 1");
  require(opts.n_paths >= 2, ErrorKind::InvalidArgument, "at least two paths are required");
  std::vector<std::vector<double>> sig(n_max, std::vector<double>(opts.n_paths, 0.0));
  std::vector<std::vector<double>> tau(n_max, std::vector<double>(opts.n_paths, 0.0));
  for_each_path(model, t, x, T, opts.simulation(), [&](std::size_t p, const PathView& v) {
    const StoppingTimes st = localization_times(v, S, V);
    for (int n = 0; n < n_max; ++n) {
      if (n < static_cast<int>(st.sigma_step.size()) && st.sigma_step[n] < v.n_steps)
        sig[n][p] = 1.0;
      if (n < static_cast<int>(st.tau_step.size()) && st.tau_step[n] < v.n_steps) tau[n][p] = 1.0;
    }
  });
  SeriesReport r;
  std::vector<double> ln, lp;
  for (int n = 0; n < n_max; ++n) {
    const MeanSe s = mean_se(sig[n]);
    const MeanSe q = mean_se(tau[n]);
    r.probs.push_back(s.mean);
    r.probs_se.push_back(s.se);
    r.tau_probs.push_back(q.mean);
    r.tau_probs_se.push_back(q.se);
    r.partial_sum += s.mean;
    if (q.mean > 0.0) {
      ln.push_back(n + 1.0);
      lp.push_back(std::log(q.mean));
    }
  }
  r.ratio_fit = ln.size() >= 2 ? std::exp(fit_line(ln, lp).slope)
                               : std::numeric_limits<double>::quiet_NaN();
  r.n_paths = opts.n_paths;
  r.elapsed = T - t;
  r.seed = opts.seed;
  return r;
}

nlohmann::json to_json(const ExitDecay& r) {
  std::vector<int> used(r.used.begin(), r.used.end());
  return {{"elapsed", r.elapsed}, {"probs", r.probs},   {"probs_se", r.probs_se},
          {"used", used},         {"slope", r.slope},   {"intercept", r.intercept},
          {"r2", r.r2},           {"unresolved", r.unresolved},
          {"n_paths", r.n_paths}, {"seed", r.seed}};
}

ExitDecay exit_decay(const ModelSpec& model, const Cylinder& S, const Vector& x,
                     const std::vector<double>& elapsed_grid, const McOptions& opts) {
  require(S.contains(x), ErrorKind::StartOutsideRegion, "start point outside S_eps");
  require(elapsed_grid.size() >= 2, ErrorKind::InvalidArgument, "elapsed grid too short");
  require(opts.n_paths >= 2, ErrorKind::InvalidArgument, "at least two paths are required");
  const auto [mn, mx] = std::minmax_element(elapsed_grid.begin(), elapsed_grid.end());
  require(*mn > 0.0, ErrorKind::NonPositiveElapsed, "elapsed times must be positive");
  require(*mx / *mn >= 100.0 * (1.0 - 1e-12), ErrorKind::InvalidArgument,
          "elapsed grid must span at least two decades");
  ExitDecay out;
  std::vector<double> fx, fy;
  const double floor = 10.0 / static_cast<double>(opts.n_paths);
  for (std::size_t g = 0; g < elapsed_grid.size(); ++g) {
    const double s = elapsed_grid[g];
    McOptions o = opts;
    o.dt = std::min(opts.dt, s / 400.0);
    o.stream = opts.stream + 1 + g;
    std::vector<double> hit(opts.n_paths, 0.0);
    for_each_path(model, 0.0, x, s, o.simulation(), [&](std::size_t p, const PathView& v) {
      for (int k = 1; k <= v.n_steps; ++k) {
        if (!S.contains(v.state(k))) {
          hit[p] = 1.0;
          return;
        }
      }
    });
    const MeanSe m = mean_se(hit);
    out.elapsed.push_back(s);
    out.probs.push_back(m.mean);
    out.probs_se.push_back(m.se);
    const bool use = m.mean > floor && m.mean <= 0.5;
    out.used.push_back(use);
    if (use) {
      fx.push_back(-1.0 / s);
      fy.push_back(std::log(m.mean));
    }
  }
  if (fx.size() < 3) {
    out.unresolved = true;
    out.slope = std::numeric_limits<double>::quiet_NaN();
    out.intercept = std::numeric_limits<double>::quiet_NaN();
    out.r2 = std::numeric_limits<double>::quiet_NaN();
  } else {
    const LineFit f = fit_line(fx, fy);
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r2 = f.r2;
  }
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  return out;
}

namespace {

struct StencilNode {
  double t;
  Vector x;
  double weight;
};

std::vector<StencilNode> backward_stencil(const Matrix& B, const Matrix& A, const Vector& a,
                                          double t, const Vector& x, double h) {
  const int p0 = static_cast<int>(A.rows());
  const double delta = h * h;
  std::vector<StencilNode> nodes;
  nodes.push_back({t, x, 0.0});
  auto shifted = [&](int i, double si, int j, double sj) {
    Vector y = x;
    y(i) += si * h;
    if (j >= 0) y(j) += sj * h;
    return y;
  };
  for (int i = 0; i < p0; ++i) {
    const double c = 0.5 * A(i, i) / (h * h);
    nodes.push_back({t, shifted(i, 1, -1, 0), c + a(i) / (2.0 * h)});
    nodes.push_back({t, shifted(i, -1, -1, 0), c - a(i) / (2.0 * h)});
    nodes[0].weight -= 2.0 * c;
    for (int j = i + 1; j < p0; ++j) {
      // 1/2 (a_ij + a_ji) d_ij u with the four-point mixed difference.
      const double m = 0.5 * (A(i, j) + A(j, i)) / (4.0 * h * h);
      nodes.push_back({t, shifted(i, 1, j, 1), m});
      nodes.push_back({t, shifted(i, 1, j, -1), -m});
      nodes.push_back({t, shifted(i, -1, j, 1), -m});
      nodes.push_back({t, shifted(i, -1, j, -1), m});
    }
  }
  nodes.push_back({t + delta, mat_exp(B, delta) * x, 1.0 / (2.0 * delta)});
  nodes.push_back({t - delta, mat_exp(B, -delta) * x, -1.0 / (2.0 * delta)});
  return nodes;
}

double check_stencil_step(double t, double T, double h) {
  require(T > t, ErrorKind::NonPositiveElapsed, "T must exceed t");
  require(h > 0.0, ErrorKind::InvalidArgument, "h must be positive");
  require(h * h <= 0.1 * (T - t), ErrorKind::StepTooLarge, "h^2 must not exceed (T - t)/10");
  return h * h;
}

}  // namespace

BackwardResidual backward_residual_exact(const GaussianKernelParams& params, const Payoff& phi,
                                         double T, double t, const Vector& x, double h,
                                         int nodes) {
  check_stencil_step(t, T, h);
  require(nodes >= 2, ErrorKind::InvalidArgument, "need at least two quadrature nodes");
  const int d = params.d();
  require(x.size() == d, ErrorKind::DimensionMismatch, "point has wrong dimension");
  const QuadratureRule gh = gauss_hermite(nodes);
  const Matrix A = params.M() * Matrix::Identity(params.p0(), params.p0());
  const auto stencil = backward_stencil(params.B(), A, Vector::Zero(params.p0()), t, x, h);

  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(nodes);
  auto u_at = [&](double ts, const Vector& xs) {
    const FrozenGaussian g(params, T - ts);
    const Vector mean = g.mean(xs);
    const Matrix& L = g.factor();
    std::vector<int> idx(d, 0);
    Vector z(d);
    double sum = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        z(i) = std::sqrt(2.0) * gh.nodes[idx[i]];
        w *= gh.weights[idx[i]] / std::sqrt(std::numbers::pi);
      }
      sum += w * phi(mean + L * z);
      for (int i = d - 1; i >= 0; --i) {
        if (++idx[i] < nodes) break;
        idx[i] = 0;
      }
    }
    return sum;
  };
  BackwardResidual r;
  for (const auto& node : stencil) {
    const double u = u_at(node.t, node.x);
    if (&node == &stencil.front()) r.u = u;
    r.residual += node.weight * u;
  }
  return r;
}

BackwardResidual backward_residual_mc(const ModelSpec& model, const Payoff& phi, double T,
                                      double t, const Vector& x, double h, int n_steps,
                                      const McOptions& opts) {
  check_stencil_step(t, T, h);
  require(n_steps >= 1, ErrorKind::InvalidArgument, "n_steps must be >= 1");
  require(x.size() == model.d, ErrorKind::DimensionMismatch, "point has wrong dimension");
  require(opts.n_paths >= 2, ErrorKind::InvalidArgument, "at least two paths are required");
  const auto stencil =
      backward_stencil(model.B, model.diffusion_at(t, x), model.drift_at(t, x), t, x, h);
  for (const auto& node : stencil)
    require(model.domain.contains(node.x), ErrorKind::InvalidArgument, "stencil leaves D");

  std::vector<double> combo(opts.n_paths, 0.0);
  std::vector<double> base(opts.n_paths, 0.0);
  for (std::size_t k = 0; k < stencil.size(); ++k) {
    const auto& node = stencil[k];
    SimulationOptions so = opts.simulation();
    so.dt = (T - node.t) / n_steps;  // same step count at every node
    for_each_path(model, node.t, node.x, T, so, [&](std::size_t p, const PathView& v) {
      const double value = phi(Vector(v.final_state()));
      combo[p] += node.weight * value;
      if (k == 0) base[p] = value;
    });
  }
  const MeanSe r = mean_se(combo);
  BackwardResidual out;
  out.residual = r.mean;
  out.se = r.se;
  out.u = mean_se(base).mean;
  return out;
}

double forward_residual(const GaussianKernelParams& params, double t, const Vector& x, double T,
                        const Vector& xi, double h) {
  return pde_residual(t, x, T, xi, params, h).forward;
}

}  // namespace hypodiff
