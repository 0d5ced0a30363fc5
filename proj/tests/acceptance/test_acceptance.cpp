// Acceptance battery: one test per criterion, tolerances pinned here rather
// than taken from the experiment configurations.
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "hypodiff/cli/experiments.hpp"

using namespace hypodiff::cli;
using nlohmann::json;

namespace {

const std::filesystem::path kOutDir = std::filesystem::temp_directory_path() / "hypodiff-acceptance";

BatteryEntry entry(const std::string& label) {
  for (auto& e : acceptance_battery(kOutDir))
    if (e.label == label) return e;
  ADD_FAILURE() << "no battery entry " << label;
  return {};
}

json run_label(const std::string& label, unsigned threads = 1) {
  const ExperimentConfig cfg = ExperimentConfig::resolve(entry(label).config);
  return run_experiment(cfg, RunContext{threads, false}).summary;
}

const json& rec(const json& summary, const std::string& name) {
  for (const auto& r : summary["records"])
    if (r["name"] == name) return r;
  static const json missing;
  ADD_FAILURE() << "no record " << name;
  return missing;
}

double num(const json& v) { return v.get<double>(); }

}  // namespace

TEST(Criterion1, GeometryExactness) {
  for (const char* label : {"geometry-asian", "hypo-kolmogorov3"}) {
    const json s = run_label(label);
    EXPECT_LE(num(rec(s, "quasi_norm_homogeneity_rel_error")["estimate"]), 1e-12) << label;
    EXPECT_EQ(rec(s, "height_additivity_mismatches")["estimate"], 0) << label;
  }
}

TEST(Criterion2, HypoellipticityDetection) {
  EXPECT_EQ(rec(run_label("geometry-asian"), "kalman_rank")["estimate"], 2);
  EXPECT_EQ(rec(run_label("hypo-kolmogorov3"), "kalman_rank")["estimate"], 3);
  const json zero = run_label("hypo-zero-drift");
  EXPECT_EQ(rec(zero, "kalman_rank")["estimate"], 1);
  EXPECT_LT(num(rec(zero, "kalman_rank")["estimate"]), num(rec(zero, "kalman_rank")["target"]));
}

TEST(Criterion3, KernelCorrectness) {
  const json s = run_label("kernel-kolmogorov2");
  EXPECT_LE(num(rec(s, "covariance_closed_form_error")["estimate"]), 1e-12);
  EXPECT_LE(num(rec(s, "covariance_composition_rel_error")["estimate"]), 1e-10);
  EXPECT_LE(std::abs(num(rec(s, "kernel_mass")["estimate"]) - 1.0), 1e-6);
  EXPECT_LE(num(rec(s, "chapman_kolmogorov_quadrature")["estimate"]), 1e-6);
  EXPECT_LE(num(rec(s, "chapman_kolmogorov_analytic")["estimate"]), 1e-6);
  for (const char* name : {"backward_richardson_ratio", "forward_richardson_ratio"}) {
    const double r = num(rec(s, name)["estimate"]);
    EXPECT_GE(r, 3.4) << name;
    EXPECT_LE(r, 4.6) << name;
  }
}

TEST(Criterion4, IntrinsicTaylor) {
  const json s = run_label("taylor");
  EXPECT_GE(num(rec(s, "remainder_slope_x2")["estimate"]), 2.0 + 1.0 - 0.15);
  EXPECT_GE(num(rec(s, "remainder_slope_sin_x1")["estimate"]), 2.0 + 1.0 - 0.15);
  EXPECT_LE(num(rec(s, "polynomial_exactness_max_error")["estimate"]), 1e-12);
}

TEST(Criterion5, GeneratorLimits) {
  const json s = run_label("limits-asian");
  EXPECT_LE(std::abs(num(rec(s, "generator_limit_second")["estimate"][0][0]) - 1.0), 0.05);
  const json& first = rec(s, "generator_limit_first");
  EXPECT_LE(std::abs(num(first["estimate"][0])), 3.0 * num(first["se"][0]));
  const json& full = rec(s, "generator_limit_second_full");
  const int p0 = 1;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (i >= p0 || j >= p0)
        EXPECT_LE(std::abs(num(full["estimate"][i][j])), 3.0 * num(full["se"][i][j]))
            << "full entry (" << i + 1 << "," << j + 1 << ")";
  EXPECT_LE(num(rec(s, "tail_mass")["estimate"]), 0.01);
}

TEST(Criterion6, IntrinsicIto) {
  const json s = run_label("ito-asian");
  const double dt = 1e-3;
  EXPECT_LE(num(rec(s, "ito_x2")["max_abs_martingale"]), 10.0 * dt);
  const json& m = rec(s, "martingale_mean_x1");
  EXPECT_LE(std::abs(num(m["estimate"])), 3.0 * num(m["se"]));
  const double target = std::exp(0.1) - 1.0;
  for (const char* side : {"qv_lhs", "qv_rhs"}) {
    const json& r = rec(s, side);
    EXPECT_LE(std::abs(num(r["estimate"]) - target), 3.0 * num(r["se"])) << side;
  }
}

TEST(Criterion7, GreenAndDensity) {
  const json s = run_label("density-kolmogorov2");
  const json& green = rec(s, "green_estimate");
  const json& exact = rec(s, "exact_kernel")["estimate"];
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const json& node = green["nodes"][i];
    const double g = num(node["value"]), e = num(exact[i]), se = num(node["se"]);
    err = std::max(err, std::abs(g - e));
    peak = std::max(peak, e);
    EXPECT_LE(g, e + 3.0 * se) << "node " << i;
  }
  EXPECT_LE(err / peak, 0.05);
  EXPECT_EQ(num(green["n_paths"]), 2e5);
  const json& series = rec(s, "localization_series");
  for (std::size_t n = 1; n < series["probs"].size(); ++n)
    EXPECT_LE(num(series["probs"][n]), num(series["probs"][n - 1]));
  EXPECT_LE(num(series["probs"][1]), 1e-2);
  const json& exit = rec(s, "exit_decay");
  if (!exit["unresolved"].get<bool>()) {
    EXPECT_GT(num(exit["slope"]), 0.0);
    EXPECT_GE(num(exit["r2"]), 0.9);
  }
}

TEST(Criterion8, MomentScaling) {
  for (const char* label : {"moments-kolmogorov2", "moments-asian"}) {
    const json s = run_label(label);
    for (int q : {2, 4})
      EXPECT_GE(num(rec(s, "moment_scaling_q" + std::to_string(q))["slope"]), q / 2.0 - 0.1)
          << label << " q=" << q;
  }
}

TEST(Criterion9, ReproducibleAcrossThreadCounts) {
  for (const auto& e : acceptance_battery(kOutDir)) {
    if (!e.stochastic) continue;
    const std::string reference = summary_text(run_label(e.label, 1));
    for (unsigned threads : {4u, 8u})
      EXPECT_EQ(summary_text(run_label(e.label, threads)), reference)
          << e.label << " at " << threads << " threads";
  }
}
