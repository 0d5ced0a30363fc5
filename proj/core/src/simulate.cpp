#include "hypodiff/simulate.hpp"

#include <cmath>

#include "hypodiff/error.hpp"
#include "hypodiff/parallel.hpp"

namespace hypodiff {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-worker scratch space for one Euler-Maruyama path.
class PathStepper {
 public:
  explicit PathStepper(const ModelSpec& model)
      : model_(model),
        A_(model.p0, model.p0),
        L_(Matrix::Zero(model.p0, model.p0)),
        L_const_(model.p0, model.p0),
        a_(Vector::Zero(model.p0)),
        z_(model.p0),
        noise_(model.p0),
        drift_(model.d) {
    require(model.B.rows() == model.d && model.B.cols() == model.d, ErrorKind::DimensionMismatch,
            "model drift matrix has wrong shape");
    if (model.constant_diffusion) {
      require(lower_factor(*model.constant_diffusion, L_const_), ErrorKind::NonSPDDiffusion,
              "diffusion matrix is not positive semidefinite");
    }
  }

  /// Fills states[0 .. (n+1) d) starting from x0 at t0.
  std::optional<double> run(double t0, const Vector& x0, int n, double dt, std::mt19937_64& rng,
                            double* states) {
    const int d = model_.d;
    const int p0 = model_.p0;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqdt = std::sqrt(dt);
    Eigen::Map<Vector>(states, d) = x0;

    bool frozen = false;
    std::optional<double> outer_exit;
    if (model_.constant_diffusion) L_ = L_const_;
    if (model_.constant_drift) a_ = *model_.constant_drift;
    const bool variable = !model_.constant_diffusion || !model_.constant_drift;

    for (int k = 0; k < n; ++k) {
      const double t = t0 + k * dt;
      Eigen::Map<const Vector> x(states + static_cast<std::size_t>(k) * d, d);
      Eigen::Map<Vector> xn(states + static_cast<std::size_t>(k + 1) * d, d);
      if (!frozen && variable && !model_.outer_domain.contains(x)) {
        frozen = true;
        outer_exit = t;
      }
      if (!frozen && variable) {
        if (!model_.constant_diffusion) {
          model_.diffusion(t, x, A_);
          if (!lower_factor(A_, L_)) {
            if (model_.domain.contains(x)) {
              fail(ErrorKind::NonSPDDiffusion,
                   "diffusion matrix is not positive semidefinite inside the domain");
            }
            L_ = last_L_;
          } else {
            last_L_ = L_;
          }
        }
        if (!model_.constant_drift) model_.drift(t, x, a_);
      }
      for (int i = 0; i < p0; ++i) z_(i) = normal(rng);
      drift_.noalias() = model_.B * x;
      xn = x + dt * drift_;
      noise_.noalias() = L_.triangularView<Eigen::Lower>() * z_;
      xn.head(p0) += dt * a_ + sqdt * noise_;
    }
    if (!frozen && variable && model_.outer_domain.d() == d) {
      // Record an exit detected at the final grid point as well.
      Eigen::Map<const Vector> x(states + static_cast<std::size_t>(n) * d, d);
      if (!model_.outer_domain.contains(x)) outer_exit = t0 + n * dt;
    }
    return outer_exit;
  }

 private:
  const ModelSpec& model_;
  Matrix A_;
  Matrix L_;
  Matrix L_const_;
  Matrix last_L_ = Matrix::Zero(model_.p0, model_.p0);
  Vector a_;
  Vector z_;
  Vector noise_;
  Vector drift_;
};

void check_start(const ModelSpec& model, double t0, const Vector& x0, double T) {
  require(x0.size() == model.d, ErrorKind::DimensionMismatch, "start point has wrong dimension");
  require(T > t0, ErrorKind::NonPositiveElapsed, "final time must exceed start time");
}

}  // namespace

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t path) {
  const std::uint64_t key =
      splitmix64(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL)) ^ path);
  return std::mt19937_64(key);
}

StepPlan plan_steps(double t0, double T, double dt) {
  require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
  require(T > t0, ErrorKind::NonPositiveElapsed, "final time must exceed start time");
  const double ratio = (T - t0) / dt;
  require(ratio < 1e9, ErrorKind::InvalidArgument, "too many time steps");
  const int n = std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
  return {n, (T - t0) / n};
}

void for_each_path(const ModelSpec& model, double t0, const Vector& x0, double T,
                   const SimulationOptions& opts, const PathVisitor& visit) {
  check_start(model, t0, x0, T);
  const StepPlan plan = plan_steps(t0, T, opts.dt);
  const unsigned threads = resolve_threads(opts.threads);
  const int d = model.d;
  parallel_for(
      opts.n_paths, threads,
      [&](std::size_t begin, std::size_t end) {
        PathStepper stepper(model);
        std::vector<double> buffer(static_cast<std::size_t>(plan.n_steps + 1) * d);
        for (std::size_t p = begin; p < end; ++p) {
          auto rng = path_engine(opts.seed, opts.stream, p);
          PathView view;
          view.outer_exit = stepper.run(t0, x0, plan.n_steps, plan.dt, rng, buffer.data());
          view.t0 = t0;
          view.dt = plan.dt;
          view.n_steps = plan.n_steps;
          view.d = d;
          view.states = buffer;
          visit(p, view);
        }
      },
      64);
}

void for_each_start(const ModelSpec& model, std::span<const PathStart> starts, double T,
                    const SimulationOptions& opts, const PathVisitor& visit) {
  require(opts.dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  for (const auto& s : starts) check_start(model, s.t0, s.x0, T);
  const unsigned threads = resolve_threads(opts.threads);
  const int d = model.d;
  parallel_for(
      starts.size(), threads,
      [&](std::size_t begin, std::size_t end) {
        PathStepper stepper(model);
        std::vector<double> buffer;
        for (std::size_t p = begin; p < end; ++p) {
          const StepPlan plan = plan_steps(starts[p].t0, T, opts.dt);
          buffer.resize(static_cast<std::size_t>(plan.n_steps + 1) * d);
          auto rng = path_engine(opts.seed, opts.stream, p);
          PathView view;
          view.outer_exit =
              stepper.run(starts[p].t0, starts[p].x0, plan.n_steps, plan.dt, rng, buffer.data());
          view.t0 = starts[p].t0;
          view.dt = plan.dt;
          view.n_steps = plan.n_steps;
          view.d = d;
          view.states = buffer;
          visit(p, view);
        }
      },
      64);
}

PathView PathEnsemble::view(std::size_t path) const {
  require(path < n_paths, ErrorKind::InvalidArgument, "path index out of range");
  const std::size_t stride = static_cast<std::size_t>(n_steps + 1) * d;
  PathView v;
  v.t0 = t0;
  v.dt = dt;
  v.n_steps = n_steps;
  v.d = d;
  v.states = std::span<const double>(states.data() + path * stride, stride);
  if (path < outer_exit.size()) v.outer_exit = outer_exit[path];
  return v;
}

std::vector<double> PathEnsemble::times() const {
  std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) t[k] = t0 + k * dt;
  return t;
}

PathEnsemble euler_maruyama(const ModelSpec& model, double t0, const Vector& x0, double T,
                            const SimulationOptions& opts) {
  check_start(model, t0, x0, T);
  require(opts.dt <= (T - t0) / 10.0 * (1.0 + 1e-12), ErrorKind::StepTooLarge,
          "dt must not exceed (T - t0)/10");
  require(opts.n_paths > 0, ErrorKind::InvalidArgument, "n_paths must be positive");
  const StepPlan plan = plan_steps(t0, T, opts.dt);
  PathEnsemble e;
  e.t0 = t0;
  e.dt = plan.dt;
  e.n_steps = plan.n_steps;
  e.d = model.d;
  e.n_paths = opts.n_paths;
  e.seed = opts.seed;
  const std::size_t stride = static_cast<std::size_t>(plan.n_steps + 1) * model.d;
  e.states.resize(stride * opts.n_paths);
  e.outer_exit.resize(opts.n_paths);
  for_each_path(model, t0, x0, T, opts, [&](std::size_t p, const PathView& v) {
    std::copy(v.states.begin(), v.states.end(), e.states.begin() + p * stride);
    e.outer_exit[p] = v.outer_exit;
  });
  return e;
}

std::optional<double> first_exit_time(const PathView& path, const StatePredicate& region) {
  require(region(path.state(0)), ErrorKind::StartOutsideRegion, "path starts outside the region");
  for (int k = 1; k <= path.n_steps; ++k) {
    if (!region(path.state(k))) return path.time(k);
  }
  return std::nullopt;
}

std::vector<std::optional<double>> first_exit_time(const PathEnsemble& ensemble,
                                                   const StatePredicate& region) {
  std::vector<std::optional<double>> out(ensemble.n_paths);
  for (std::size_t p = 0; p < ensemble.n_paths; ++p) out[p] = first_exit_time(ensemble.view(p), region);
  return out;
}

Cylinder::Cylinder(Vector center, double eps_) : x0(std::move(center)), eps(eps_) {
  require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidArgument, "eps must lie in (0, 1)");
  require(x0.size() >= 1, ErrorKind::DimensionMismatch, "cylinder centre must be non-empty");
}

double Cylinder::half_width_transverse() const noexcept { return std::sqrt(1.0 - eps * eps); }

bool Cylinder::contains(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != x0.size()) return false;
  double rest = 0.0;
  for (Eigen::Index i = 1; i < y.size(); ++i) rest += (y(i) - x0(i)) * (y(i) - x0(i));
  const double u = y(0) - x0(0);
  return (u + eps) * (u + eps) + rest < 1.0 && (u - eps) * (u - eps) + rest < 1.0;
}

void check_inner_contained(const Cylinder& S, const Ball& V) {
  require(V.center.size() == S.x0.size(), ErrorKind::DimensionMismatch,
          "ball and cylinder dimensions differ");
  require(V.radius > 0.0, ErrorKind::InvalidArgument, "ball radius must be positive");
  // The closed ball B(c, r) lies in the open ball B(q, 1) iff |c - q| + r < 1.
  Vector q = S.x0;
  q(0) -= S.eps;
  const bool left = (V.center - q).norm() + V.radius < 1.0;
  q(0) += 2.0 * S.eps;
  const bool right = (V.center - q).norm() + V.radius < 1.0;
  require(left && right, ErrorKind::InnerNotContained,
          "closed inner ball is not contained in the cylinder");
}

StoppingTimes localization_times(const PathView& path, const Cylinder& S, const Ball& V) {
  StoppingTimes st;
  int k = 0;
  bool looking_for_sigma = true;
  for (; k <= path.n_steps; ++k) {
    const auto x = path.state(k);
    if (looking_for_sigma) {
      if (V.contains_closed(x)) {
        st.sigma.push_back(path.time(k));
        st.sigma_step.push_back(k);
        looking_for_sigma = false;
      }
    } else if (!S.contains(x)) {
      st.tau.push_back(path.time(k));
      st.tau_step.push_back(k);
      looking_for_sigma = true;
    }
  }
  return st;
}

StoppingRecord localization_times(const PathEnsemble& ensemble, const Cylinder& S, const Ball& V) {
  check_inner_contained(S, V);
  StoppingRecord rec(ensemble.n_paths);
  for (std::size_t p = 0; p < ensemble.n_paths; ++p) {
    rec[p] = localization_times(ensemble.view(p), S, V);
  }
  return rec;
}

}  // namespace hypodiff
