#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hypodiff/model.hpp"
#include "hypodiff/types.hpp"

namespace hypodiff {

struct SimulationOptions {
  double dt = 1e-3;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  /// Independent sub-stream tag; distinct tags give independent ensembles
  /// for the same seed.
  std::uint64_t stream = 0;
  /// 0 = HYPODIFF_THREADS or hardware concurrency.
  unsigned threads = 0;
};

/// Step plan on [t0, T]: n = ceil((T - t0)/dt) steps of equal size (T - t0)/n.
struct StepPlan {
  int n_steps = 0;
  double dt = 0.0;
};
StepPlan plan_steps(double t0, double T, double dt);

/// Read-only view of one simulated path on the grid t0 + k dt, k = 0..n_steps.
struct PathView {
  double t0 = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  int d = 0;
  std::span<const double> states;  // (n_steps + 1) x d, row-major
  /// First grid time at which the path was found outside D' (after which the
  /// coefficients stay frozen).
  std::optional<double> outer_exit;

  double time(int k) const noexcept { return t0 + k * dt; }
  Eigen::Map<const Vector> state(int k) const {
    return Eigen::Map<const Vector>(states.data() + static_cast<std::size_t>(k) * d, d);
  }
  Eigen::Map<const Vector> final_state() const { return state(n_steps); }
};

using PathVisitor = std::function<void(std::size_t path, const PathView& view)>;

/// Random engine of one path: deterministic function of (seed, stream, path).
std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t path);

/// Simulates opts.n_paths Euler-Maruyama paths from (t0, x0) to T and calls
/// `visit` for each. Paths are processed in parallel; each path's result is a
/// deterministic function of (seed, stream, path index), independent of the
/// thread count. `visit` may be called concurrently for distinct paths.
void for_each_path(const ModelSpec& model, double t0, const Vector& x0, double T,
                   const SimulationOptions& opts, const PathVisitor& visit);

struct PathStart {
  double t0 = 0.0;
  Vector x0;
};

/// One path per start (path index = start index), each run to T with at most
/// step size opts.dt (at least one step). opts.n_paths is ignored.
void for_each_start(const ModelSpec& model, std::span<const PathStart> starts, double T,
                    const SimulationOptions& opts, const PathVisitor& visit);

/// Stored ensemble of paths on a common grid.
struct PathEnsemble {
  double t0 = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  int d = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> states;  // [path][step][coordinate]
  std::vector<std::optional<double>> outer_exit;

  PathView view(std::size_t path) const;
  std::vector<double> times() const;
};

/// Stores the full ensemble; throws StepTooLarge when dt > (T - t0)/10 and
/// NonSPDDiffusion when A is not positive semidefinite at a visited point of D.
PathEnsemble euler_maruyama(const ModelSpec& model, double t0, const Vector& x0, double T,
                            const SimulationOptions& opts);

using StatePredicate = std::function<bool(const Eigen::Ref<const Vector>&)>;

/// First grid time at which the path leaves `region`; nullopt if it stays.
/// Throws StartOutsideRegion when the path starts outside.
std::optional<double> first_exit_time(const PathView& path, const StatePredicate& region);
std::vector<std::optional<double>> first_exit_time(const PathEnsemble& ensemble,
                                                   const StatePredicate& region);

/// S_eps = B(x0 - eps e1, 1) intersected with B(x0 + eps e1, 1), 0 < eps < 1.
struct Cylinder {
  Vector x0;
  double eps = 0.5;

  Cylinder(Vector center, double eps);
  bool contains(const Eigen::Ref<const Vector>& y) const;
  /// Half-width of S_eps along e1 (1 - eps) and across (sqrt(1 - eps^2)).
  double half_width_axial() const noexcept { return 1.0 - eps; }
  double half_width_transverse() const noexcept;
};

struct Ball {
  Vector center;
  double radius = 0.0;
  bool contains_closed(const Eigen::Ref<const Vector>& y) const {
    return (y - center).norm() <= radius;
  }
};

/// Throws InnerNotContained when the closed ball is not inside S_eps.
void check_inner_contained(const Cylinder& S, const Ball& V);

/// Grid stopping times: sigma_1 = first time in closed V, tau_n = first exit
/// from S_eps after sigma_n, sigma_{n+1} = first time in closed V after tau_n.
/// Only times reached within the grid are recorded.
struct StoppingTimes {
  std::vector<double> sigma;
  std::vector<double> tau;
  std::vector<int> sigma_step;
  std::vector<int> tau_step;
};
StoppingTimes localization_times(const PathView& path, const Cylinder& S, const Ball& V);

using StoppingRecord = std::vector<StoppingTimes>;
StoppingRecord localization_times(const PathEnsemble& ensemble, const Cylinder& S, const Ball& V);

/// Little-endian binary export: five 64-bit header fields (d, n_paths,
/// n_steps, dt as IEEE-754 bits, seed) followed by the float64 state array in
/// [path][step][coordinate] order, (n_steps + 1) rows per path.
void write_binary(const PathEnsemble& ensemble, std::ostream& out);
/// Inverse of write_binary; t0 is not stored and is set to 0.
PathEnsemble read_binary(std::istream& in);
/// CSV with header path,step,t,x1..xd; 17 significant digits.
void write_csv(const PathEnsemble& ensemble, std::ostream& out);

}  // namespace hypodiff
