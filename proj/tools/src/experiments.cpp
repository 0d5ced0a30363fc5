#include "hypodiff/cli/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "hypodiff/calculus.hpp"
#include "hypodiff/density.hpp"
#include "hypodiff/error.hpp"
#include "hypodiff/format.hpp"
#include "hypodiff/geometry.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/parallel.hpp"
#include "hypodiff/polynomial.hpp"
#include "hypodiff/quadrature.hpp"
#include "hypodiff/simulate.hpp"
#include "hypodiff/verify.hpp"

namespace hypodiff::cli {
namespace {

using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec_json(m.row(i).transpose()));
  return out;
}

json record(const std::string& name, json estimate, json se, json target, double elapsed,
            std::size_t n_paths, std::uint64_t seed) {
  return {{"name", name},       {"estimate", std::move(estimate)}, {"se", std::move(se)},
          {"target", std::move(target)}, {"elapsed", elapsed},     {"n_paths", n_paths},
          {"seed", seed}};
}

/// Short form for console lines; full precision lives in the JSON summary.
std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json deterministic(const std::string& name, json estimate, json target) {
  return record(name, std::move(estimate), 0.0, std::move(target), 0.0, 0, 0);
}

/// Accumulates records and contracts for one summary.
class Summary {
 public:
  void add(json r) { records_.push_back(std::move(r)); }

  /// value relation bound, with relation one of "<=", ">=", "==".
  bool check(const std::string& name, double value, const std::string& relation, double bound,
             const std::string& note = "") {
    bool pass = false;
    if (relation == "<=") pass = value <= bound;
    else if (relation == ">=") pass = value >= bound;
    else if (relation == "==") pass = value == bound;
    json c{{"name", name}, {"pass", pass}, {"value", value}, {"relation", relation},
           {"bound", bound}};
    if (!note.empty()) c["note"] = note;
    contracts_.push_back(std::move(c));
    lines_.push_back(std::string(pass ? "PASS " : "FAIL ") + name + ": " +
                     short_number(value) + " " + relation + " " + short_number(bound) +
                     (note.empty() ? "" : " (" + note + ")"));
    all_pass_ = all_pass_ && pass;
    return pass;
  }

  void line(std::string s) { lines_.push_back(std::move(s)); }

  RunResult finish(const ExperimentConfig& cfg) {
    RunResult r;
    r.pass = all_pass_;
    r.summary = {{"schema", kSummarySchema}, {"experiment", cfg.experiment()},
                 {"config", cfg.resolved()},     {"records", records_},
                 {"contracts", contracts_},  {"pass", all_pass_}};
    r.lines = std::move(lines_);
    r.lines.push_back(all_pass_ ? "PASS" : "FAIL");
    return r;
  }

 private:
  json records_ = json::array();
  json contracts_ = json::array();
  std::vector<std::string> lines_;
  bool all_pass_ = true;
};

McOptions mc_options(const ExperimentConfig& cfg, const RunContext& ctx, std::uint64_t stream) {
  McOptions o;
  o.dt = cfg.number("dt");
  o.n_paths = cfg.count("n_paths");
  o.seed = cfg.integer("seed");
  o.stream = stream;
  o.threads = ctx.threads;
  return o;
}

/// |estimate - target| / se, with 0/0 read as 0.
double se_ratio(double estimate, double target, double se) {
  const double err = std::abs(estimate - target);
  if (se > 0.0) return err / se;
  return err == 0.0 ? 0.0 : kInf;
}

bool is_chain(const Matrix& B, int p0) {
  if (p0 != 1) return false;
  const int d = static_cast<int>(B.rows());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (B(i, j) != (i == j + 1 ? 1.0 : 0.0)) return false;
  return true;
}

void open_output(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot open output file '" + path + "'");
}

// ---------------------------------------------------------------------------

RunResult run_check_hypo(const ExperimentConfig& cfg) {
  Summary sum;
  const RawModelShape shape = raw_model_shape(cfg.resolved()["model"], cfg.number("asian_floor"));
  const int d = static_cast<int>(shape.B.rows());
  const int p0 = shape.sizes.front();
  const int rank = kalman_rank(shape.B, p0);
  const bool expect = cfg.flag("expect_hypoelliptic");
  sum.add(deterministic("kalman_rank", rank, d));
  const bool hypo = rank == d;
  sum.line("rank " + std::to_string(rank) + " of " + std::to_string(d) + ", " +
           (hypo == expect ? "PASS" : "FAIL"));
  sum.check("hypoellipticity_as_expected", hypo == expect ? 1.0 : 0.0, "==", 1.0,
            std::string(hypo ? "hypoelliptic" : "not hypoelliptic") +
                (expect ? ", expected hypoelliptic" : ", expected failure"));

  std::optional<BlockStructure> structure;
  try {
    structure = validate_block_form(shape.B, shape.sizes);
  } catch (const Error& e) {
    sum.line(std::string("block form rejected: ") + e.what());
  }
  sum.add(deterministic("block_form_valid", structure.has_value(), nullptr));
  if (!structure) return sum.finish(cfg);

  std::mt19937_64 rng(cfg.integer("seed"));
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> log_lambda(std::log(1e-3), std::log(1e3));
  std::uniform_int_distribution<int> exponent(0, 4);
  const std::size_t n = cfg.count("samples");
  double homogeneity = 0.0;
  std::size_t triangle_violations = 0;
  std::size_t height_mismatches = 0;
  for (std::size_t k = 0; k < n; ++k) {
    Vector x(d), y(d);
    for (int i = 0; i < d; ++i) x(i) = coord(rng);
    for (int i = 0; i < d; ++i) y(i) = coord(rng);
    const double lambda = std::exp(log_lambda(rng));
    const double lhs = quasi_norm(dilation(lambda, x, *structure), *structure);
    const double rhs = lambda * quasi_norm(x, *structure);
    if (rhs > 0.0) homogeneity = std::max(homogeneity, std::abs(lhs - rhs) / rhs);
    const double sum_norm = quasi_norm(x, *structure) + quasi_norm(y, *structure);
    if (quasi_norm(x + y, *structure) > sum_norm * (1.0 + 1e-12)) ++triangle_violations;
    MultiIndex a = MultiIndex::zero(d), b = MultiIndex::zero(d);
    for (int i = 0; i < d; ++i) a.exponents[i] = exponent(rng);
    for (int i = 0; i < d; ++i) b.exponents[i] = exponent(rng);
    if (multi_index_height(a + b, *structure) !=
        multi_index_height(a, *structure) + multi_index_height(b, *structure))
      ++height_mismatches;
  }
  sum.add(deterministic("quasi_norm_homogeneity_rel_error", homogeneity, 0.0));
  sum.add(deterministic("quasi_triangle_violations", triangle_violations, 0));
  sum.add(deterministic("height_additivity_mismatches", height_mismatches, 0));
  sum.check("quasi_norm_homogeneity", homogeneity, "<=", 1e-12);
  sum.check("quasi_triangle_constant_one", static_cast<double>(triangle_violations), "==", 0.0);
  sum.check("height_additivity", static_cast<double>(height_mismatches), "==", 0.0);
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_kernel_table(const ExperimentConfig& cfg, const RunContext& ctx) {
  Summary sum;
  const ModelSpec m = cfg.model();
  const GaussianKernelParams params(m.B, m.p0, cfg.number("M"));
  const double t = cfg.number("t"), T = cfg.number("T"), s = T - t;
  const Vector x = cfg.vector("x"), xi = cfg.vector("xi");
  const int d = m.d;

  const Matrix cv = covariance(s, params).matrix;
  sum.add(deterministic("covariance", mat_json(cv), nullptr));
  if (is_chain(m.B, m.p0)) {
    Matrix closed(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        closed(i, j) = params.M() * std::pow(s, i + j + 1) /
                       ((i + j + 1) * std::tgamma(i + 1.0) * std::tgamma(j + 1.0));
    const double err = (cv - closed).cwiseAbs().maxCoeff();
    sum.add(deterministic("covariance_closed_form_error", err, 0.0));
    sum.check("covariance_closed_form", err, "<=", 1e-12 * std::max(1.0, closed.cwiseAbs().maxCoeff()));
  }
  const double s1 = 0.3 * s;
  const Matrix E = mat_exp(m.B, s1);
  const Matrix composed =
      covariance(s1, params).matrix + E * covariance(s - s1, params).matrix * E.transpose();
  const double comp = (composed - cv).cwiseAbs().maxCoeff() / cv.cwiseAbs().maxCoeff();
  sum.add(deterministic("covariance_composition_rel_error", comp, 0.0));
  sum.check("covariance_composition", comp, "<=", 1e-10);

  BoxQuadratureOptions quad;
  if (d >= 3) quad.panels = 8;
  const double mass = kernel_mass(t, x, T, params, quad);
  sum.add(deterministic("kernel_mass", mass, 1.0));
  sum.check("kernel_normalization", std::abs(mass - 1.0), "<=", 1e-6);

  const auto ck = chapman_kolmogorov_residual(t, t + 0.5 * s, T, x, xi, params, quad);
  sum.add(deterministic("chapman_kolmogorov_analytic", ck.analytic, 0.0));
  sum.add(deterministic("chapman_kolmogorov_quadrature", ck.quadrature, 0.0));
  sum.check("chapman_kolmogorov_analytic", ck.analytic, "<=", 1e-6);
  sum.check("chapman_kolmogorov_quadrature", ck.quadrature, "<=", 1e-6);

  const double h = cfg.number("fd_step");
  const PdeResidual coarse = pde_residual(t, x, T, xi, params, h);
  const PdeResidual fine = pde_residual(t, x, T, xi, params, 0.5 * h);
  const double rb = coarse.backward / fine.backward;
  const double rf = coarse.forward / fine.forward;
  sum.add(deterministic("backward_residual", json::array({coarse.backward, fine.backward}), 0.0));
  sum.add(deterministic("forward_residual", json::array({coarse.forward, fine.forward}), 0.0));
  sum.add(deterministic("backward_richardson_ratio", rb, 4.0));
  sum.add(deterministic("forward_richardson_ratio", rf, 4.0));
  sum.check("backward_richardson_ratio_min", rb, ">=", 3.4);
  sum.check("backward_richardson_ratio_max", rb, "<=", 4.6);
  sum.check("forward_richardson_ratio_min", rf, ">=", 3.4);
  sum.check("forward_richardson_ratio_max", rf, "<=", 4.6);

  const std::string csv = cfg.string("csv");
  if (!csv.empty() && ctx.write_artifacts) {
    const FrozenGaussian g(params, s);
    const double radius = cfg.resolved()["grid"]["radius"].get<double>();
    const int per_axis = cfg.resolved()["grid"]["per_axis"].get<int>();
    const Matrix axes = principal_axes(g.cov().matrix);
    const Vector mean = g.mean(x);
    std::ofstream out;
    open_output(out, csv);
    for (int i = 0; i < d; ++i) out << 'x' << (i + 1) << ',';
    out << "value\n";
    std::vector<int> idx(d, 0);
    while (true) {
      Vector u(d);
      for (int i = 0; i < d; ++i) u(i) = -radius + 2.0 * radius * idx[i] / (per_axis - 1);
      if (u.norm() <= radius * (1.0 + 1e-12)) {
        const Vector node = mean + axes * u;
        for (int i = 0; i < d; ++i) out << format_double(node(i)) << ',';
        out << format_double(g.density(x, node)) << '\n';
      }
      int k = 0;
      while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
      if (k == d) break;
    }
  }
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_taylor(const ExperimentConfig& cfg) {
  Summary sum;
  const std::uint64_t seed = cfg.integer("seed");
  const int points = static_cast<int>(cfg.count("points"));
  const double r_min = cfg.number("r_min"), r_max = cfg.number("r_max");
  constexpr int kOrder = 2;
  constexpr double kAlpha = 1.0;

  Matrix B2 = Matrix::Zero(2, 2);
  B2(1, 0) = 1.0;
  const BlockStructure s2 = validate_block_form(B2, std::vector<int>{1, 1});
  const SpaceTimePoint base{0.0, Vector::Zero(2)};
  const auto cloud = intrinsic_cloud(base, B2, s2, r_min, r_max, points, seed);

  const JetSpec jx = polynomial_jet(Polynomial::coordinate(2, 1), base, kOrder, kAlpha, B2, s2);
  const auto fx = remainder_order_fit([](double, const Vector& x) { return x(1); }, jx, cloud, B2, s2);
  JetSpec js(base, kOrder, kAlpha, s2);
  js.set(0, MultiIndex::zero(2), 0.0);
  js.set(0, MultiIndex({1, 0}), 1.0);
  js.set(0, MultiIndex({2, 0}), 0.0);
  js.set(1, MultiIndex::zero(2), 0.0);
  const auto fs = remainder_order_fit([](double, const Vector& x) { return std::sin(x(0)); }, js,
                                      cloud, B2, s2);
  const double bound = kOrder + kAlpha - 0.15;
  sum.add(deterministic("remainder_slope_x2", fx.slope, 3.0));
  sum.add(deterministic("remainder_slope_sin_x1", fs.slope, 3.0));
  sum.check("remainder_slope_x2", fx.slope, ">=", bound);
  sum.check("remainder_slope_sin_x1", fs.slope, ">=", bound);

  Matrix B3 = Matrix::Zero(3, 3);
  B3(1, 0) = B3(2, 1) = 1.0;
  const BlockStructure s3 = validate_block_form(B3, std::vector<int>{1, 1, 1});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  constexpr int kExactOrder = 5;
  double worst = 0.0;
  const int trials = static_cast<int>(cfg.count("trials"));
  for (int trial = 0; trial < trials; ++trial) {
    Polynomial p(3);
    for (const auto& [k, beta] : admissible_pairs(kExactOrder, s3))
      p.add_term(coef(rng), k, beta.exponents);
    Vector y(3);
    y << coef(rng), coef(rng), coef(rng);
    const SpaceTimePoint b{0.1, y};
    const JetSpec jet = polynomial_jet(p, b, kExactOrder, kAlpha, B3, s3);
    for (const auto& q : intrinsic_cloud(b, B3, s3, 1e-2, 1.0, 50, seed + 100 + trial))
      worst = std::max(worst, std::abs(taylor_eval(jet, q.t, q.x, B3, s3) - p(q.t, q.x)));
  }
  sum.add(deterministic("polynomial_exactness_max_error", worst, 0.0));
  sum.check("polynomial_exactness", worst, "<=", 1e-12);
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_simulate(const ExperimentConfig& cfg, const RunContext& ctx) {
  Summary sum;
  const ModelSpec m = cfg.model();
  const double t = cfg.number("t"), T = cfg.number("T");
  const Vector x = cfg.vector("x");
  SimulationOptions so;
  so.dt = cfg.number("dt");
  so.n_paths = cfg.count("n_paths");
  so.seed = cfg.integer("seed");
  so.threads = ctx.threads;
  const PathEnsemble ens = euler_maruyama(m, t, x, T, so);

  Vector mean(m.d), se(m.d);
  bool finite = true;
  std::size_t exits = 0;
  std::vector<double> column(ens.n_paths);
  for (int i = 0; i < m.d; ++i) {
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
      column[p] = ens.view(p).final_state()(i);
      finite = finite && std::isfinite(column[p]);
    }
    const MeanSe ms = mean_se(column);
    mean(i) = ms.mean;
    se(i) = ms.se;
  }
  for (const auto& e : ens.outer_exit) exits += e.has_value();
  const bool zero_drift =
      (m.constant_drift && m.constant_drift->isZero()) || m.name == "asian";
  const json target = zero_drift ? vec_json(mat_exp(m.B, T - t) * x) : json(nullptr);
  sum.add(record("final_mean", vec_json(mean), vec_json(se), target, T - t, ens.n_paths, so.seed));
  sum.add(record("outer_exit_fraction", static_cast<double>(exits) / ens.n_paths, nullptr,
                 nullptr, T - t, ens.n_paths, so.seed));
  sum.check("finite_states", finite ? 1.0 : 0.0, "==", 1.0);

  McOptions mo;
  mo.dt = cfg.number("moment_dt");
  mo.n_paths = cfg.count("moment_n_paths");
  mo.seed = so.seed;
  mo.threads = ctx.threads;
  const auto qs = cfg.integers("q");
  for (std::size_t k = 0; k < qs.size(); ++k) {
    mo.stream = 100 * (k + 1);
    const MomentScaling ms = moment_scaling(m, t, x, qs[k], cfg.numbers("moment_grid"), mo);
    json r = to_json(ms);
    r["name"] = "moment_scaling_q" + std::to_string(qs[k]);
    r["estimate"] = ms.moments;
    r["target"] = nullptr;
    r["slope_target"] = qs[k] / 2.0;
    r["n_paths"] = mo.n_paths;
    r["seed"] = mo.seed;
    sum.add(std::move(r));
    sum.check("moment_exponent_q" + std::to_string(qs[k]), ms.slope, ">=", qs[k] / 2.0 - 0.1);
  }

  if (ctx.write_artifacts) {
    if (const std::string path = cfg.string("ensemble"); !path.empty()) {
      std::ofstream out;
      open_output(out, path);
      write_binary(ens, out);
    }
    if (const std::string path = cfg.string("csv"); !path.empty()) {
      std::ofstream out;
      open_output(out, path);
      write_csv(ens, out);
    }
  }
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_limits(const ExperimentConfig& cfg, const RunContext& ctx) {
  Summary sum;
  const ModelSpec m = cfg.model();
  const double t = cfg.number("t"), T = cfg.number("T");
  const Vector x = cfg.vector("x");
  const GeneratorLimits g =
      generator_limits(m, t, x, T, cfg.number("delta"), mc_options(cfg, ctx, 0), cfg.number("m"));
  for (const LimitReport* r : {&g.tail, &g.first, &g.second, &g.full, &g.quasi_norm, &g.quasi_power})
    sum.add(to_json(*r));

  const double a_err = (g.second.estimate - *g.second.target).cwiseAbs().maxCoeff();
  sum.check("diffusion_limit_abs_error", a_err, "<=", cfg.number("a_tolerance"));
  double first_ratio = 0.0;
  for (Eigen::Index i = 0; i < g.first.estimate.size(); ++i)
    first_ratio = std::max(first_ratio, se_ratio(g.first.estimate(i), (*g.first.target)(i),
                                                 g.first.std_error(i)));
  sum.check("drift_limit_se_ratio", first_ratio, "<=", 3.0);
  double degenerate_ratio = 0.0;
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j)
      if (i >= m.p0 || j >= m.p0)
        degenerate_ratio = std::max(
            degenerate_ratio, se_ratio(g.full.estimate(i, j), 0.0, g.full.std_error(i, j)));
  if (m.d > m.p0) sum.check("degenerate_entries_se_ratio", degenerate_ratio, "<=", 3.0);
  sum.check("tail_mass", g.tail.value(), "<=", cfg.number("tail_bound"));
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_ito(const ExperimentConfig& cfg, const RunContext& ctx) {
  Summary sum;
  const ModelSpec m = cfg.model();
  const double t = cfg.number("t"), T = cfg.number("T"), s = T - t;
  const Vector x = cfg.vector("x");
  const McOptions base = mc_options(cfg, ctx, 0);

  if (m.d > m.p0) {
    const ItoReport deg =
        ito_check(m, Polynomial::coordinate(m.d, m.p0).smooth(m.B, m.p0), t, x, T, base);
    json r = to_json(deg);
    r["name"] = "ito_x" + std::to_string(m.p0 + 1);
    r["estimate"] = deg.martingale_mean;
    r["se"] = deg.martingale_se;
    r["target"] = 0.0;
    sum.add(std::move(r));
    sum.check("pathwise_martingale_x" + std::to_string(m.p0 + 1), deg.max_abs_martingale, "<=",
              10.0 * base.dt);
  }
  McOptions o1 = base;
  o1.stream = 1;
  const ItoReport r1 = ito_check(m, Polynomial::coordinate(m.d, 0).smooth(m.B, m.p0), t, x, T, o1);
  json j1 = to_json(r1);
  j1["name"] = "ito_x1";
  j1["estimate"] = r1.martingale_mean;
  j1["se"] = r1.martingale_se;
  j1["target"] = 0.0;
  sum.add(std::move(j1));
  sum.add(record("martingale_mean_x1", r1.martingale_mean, r1.martingale_se, 0.0, s, r1.n_paths,
                 r1.seed));
  sum.check("martingale_mean_se_ratio", se_ratio(r1.martingale_mean, 0.0, r1.martingale_se), "<=",
            3.0);

  std::optional<double> target;
  if (m.name == "asian") target = x(0) * x(0) * std::expm1(s);
  else if (m.constant_diffusion) target = (*m.constant_diffusion)(0, 0) * s;
  const json tj = target ? json(*target) : json(nullptr);
  sum.add(record("qv_lhs", r1.qv_lhs, r1.qv_lhs_se, tj, s, r1.n_paths, r1.seed));
  sum.add(record("qv_rhs", r1.qv_rhs, r1.qv_rhs_se, tj, s, r1.n_paths, r1.seed));
  if (target) {
    sum.check("qv_lhs_se_ratio", se_ratio(r1.qv_lhs, *target, r1.qv_lhs_se), "<=", 3.0);
    sum.check("qv_rhs_se_ratio", se_ratio(r1.qv_rhs, *target, r1.qv_rhs_se), "<=", 3.0);
  } else {
    sum.check("qv_sides_se_ratio", se_ratio(r1.qv_lhs, r1.qv_rhs, r1.qv_se), "<=", 3.0,
              "no closed-form target; sides compared with each other");
  }
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_density(const ExperimentConfig& cfg, const RunContext& ctx) {
  Summary sum;
  const ModelSpec m = cfg.model();
  const double t = cfg.number("t"), T = cfg.number("T"), s = T - t;
  const Vector x = cfg.vector("x");
  const Cylinder S(x, cfg.number("eps"));
  const Ball V{x, cfg.number("inner_radius")};
  KdeOptions kde;
  kde.bandwidth = cfg.number("bandwidth");
  kde.kernel = cfg.string("kernel") == "product" ? KdeKernel::Product : KdeKernel::Covariance;

  const Matrix flow = mat_exp(m.B, s);
  const Vector mean = flow * x;
  const Matrix cov =
      m.exact_kernel ? covariance(s, *m.exact_kernel).matrix : reference_covariance(m, t, x, s);
  const double radius = cfg.resolved()["grid"]["radius"].get<double>();
  const int per_axis = cfg.resolved()["grid"]["per_axis"].get<int>();
  const auto grid = central_kernel_grid(S, mean, cov, radius, per_axis);

  const DensityEstimate green = green_estimate(m, S, t, x, T, grid, kde, mc_options(cfg, ctx, 0));
  json gj = to_json(green);
  gj["name"] = "green_estimate";
  gj["estimate"] = green.values;
  gj["se"] = green.std_errors;
  gj["target"] = nullptr;
  if (m.exact_kernel) {
    json exact = json::array();
    for (const auto& node : grid) exact.push_back(gauss_eval(t, x, T, node, *m.exact_kernel));
    gj["target"] = std::move(exact);
  }
  sum.add(std::move(gj));
  if (m.exact_kernel) {
    double err = 0.0, peak = 0.0, dom = -kInf;
    std::vector<double> exact(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      exact[i] = gauss_eval(t, x, T, grid[i], *m.exact_kernel);
      err = std::max(err, std::abs(green.values[i] - exact[i]));
      peak = std::max(peak, exact[i]);
      const double excess = green.values[i] - exact[i];
      const double se = green.std_errors[i];
      dom = std::max(dom, se > 0.0 ? excess / se : (excess <= 0.0 ? 0.0 : kInf));
    }
    sum.add(deterministic("exact_kernel", exact, nullptr));
    sum.add(record("sup_relative_error", err / peak, nullptr, 0.0, s, green.n_paths, green.seed));
    sum.check("sup_relative_error", err / peak, "<=", cfg.number("sup_bound"));
    sum.check("domination_se_ratio", dom, "<=", 3.0, "max over nodes of (G - Gamma) / SE");
  } else {
    sum.line("no closed-form kernel for this model; kernel comparisons skipped");
  }

  const std::size_t n_max = cfg.count("n_max");
  const SeriesReport series = localization_series(m, S, V, t, x, T, static_cast<int>(n_max),
                                                  mc_options(cfg, ctx, 1));
  json sj = to_json(series);
  sj["name"] = "localization_series";
  sj["estimate"] = series.probs;
  sj["se"] = series.probs_se;
  sj["target"] = nullptr;
  sum.add(std::move(sj));
  bool monotone = true;
  for (std::size_t n = 1; n < series.probs.size(); ++n)
    monotone = monotone && series.probs[n] <= series.probs[n - 1];
  sum.check("series_nonincreasing", monotone ? 1.0 : 0.0, "==", 1.0);
  if (series.probs.size() >= 2) {
    sum.add(record("sigma2_probability", series.probs[1], series.probs_se[1], nullptr, s,
                   series.n_paths, series.seed));
    sum.check("sigma2_probability", series.probs[1], "<=", cfg.number("sigma2_bound"));
  }

  McOptions eo = mc_options(cfg, ctx, 2);
  eo.dt = cfg.number("exit_dt");
  eo.n_paths = cfg.count("exit_n_paths");
  const ExitDecay exit = exit_decay(m, S, x, cfg.numbers("exit_grid"), eo);
  json ej = to_json(exit);
  ej["name"] = "exit_decay";
  ej["estimate"] = exit.probs;
  ej["se"] = exit.probs_se;
  ej["target"] = nullptr;
  sum.add(std::move(ej));
  if (exit.unresolved) {
    sum.check("exit_decay_unresolved", 1.0, "==", 1.0,
              "fewer than three resolvable probabilities; reported as pass");
  } else {
    sum.check("exit_decay_slope", exit.slope, ">=", 0.0);
    sum.check("exit_decay_r2", exit.r2, ">=", 0.9);
  }

  if (const std::string csv = cfg.string("csv"); !csv.empty() && ctx.write_artifacts) {
    std::ofstream out;
    open_output(out, csv);
    write_csv(green, out);
  }
  return sum.finish(cfg);
}

// ---------------------------------------------------------------------------

RunResult run_report(const ExperimentConfig& cfg, const RunContext& ctx) {
  Summary sum;
  const ReportTable table = build_report(cfg.strings("inputs"));
  for (const auto& row : table.rows)
    sum.check(row.file, row.pass ? 1.0 : 0.0, "==", 1.0, row.experiment);
  if (ctx.write_artifacts) {
    if (const std::string p = cfg.string("csv"); !p.empty()) {
      std::ofstream out;
      open_output(out, p);
      write_report_csv(table, out);
    }
    if (const std::string p = cfg.string("markdown"); !p.empty()) {
      std::ofstream out;
      open_output(out, p);
      write_report_markdown(table, out);
    }
  }
  std::ostringstream md;
  write_report_markdown(table, md);
  RunResult r = sum.finish(cfg);
  r.lines.clear();
  std::istringstream in(md.str());
  for (std::string l; std::getline(in, l);) r.lines.push_back(l);
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunContext& ctx) {
  const std::string& e = cfg.experiment();
  if (e == "check-hypo") return run_check_hypo(cfg);
  if (e == "kernel-table") return run_kernel_table(cfg, ctx);
  if (e == "taylor") return run_taylor(cfg);
  if (e == "simulate") return run_simulate(cfg, ctx);
  if (e == "limits") return run_limits(cfg, ctx);
  if (e == "ito") return run_ito(cfg, ctx);
  if (e == "density") return run_density(cfg, ctx);
  if (e == "report") return run_report(cfg, ctx);
  fail(ErrorKind::Validation, "unknown experiment '" + e + "'");
}

std::string summary_text(const nlohmann::json& summary) { return summary.dump(2) + "\n"; }

int run(const nlohmann::json& raw, const RunContext& ctx, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig cfg = ExperimentConfig::resolve(raw);
    const RunResult r = run_experiment(cfg, ctx);
    if (cfg.has("summary") && ctx.write_artifacts) {
      if (const std::string path = cfg.string("summary"); !path.empty()) {
        std::ofstream f;
        open_output(f, path);
        f << summary_text(r.summary);
      }
    }
    for (const auto& l : r.lines) out << l << '\n';
    return r.pass ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace hypodiff::cli
