#include <fstream>
#include <ostream>

#include "hypodiff/cli/experiments.hpp"
#include "hypodiff/error.hpp"

namespace hypodiff::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kBatterySeed = 20261014;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot open output file '" + path.string() + "'");
  out << text;
}

}  // namespace

const std::vector<unsigned>& reproducibility_threads() {
  static const std::vector<unsigned> threads{1, 4, 8};
  return threads;
}

std::vector<BatteryEntry> acceptance_battery(const fs::path& out_dir) {
  auto path = [&](const std::string& name) { return (out_dir / name).string(); };
  auto summary = [&](const std::string& label) { return path(label + ".json"); };
  std::vector<BatteryEntry> b;
  b.push_back({"geometry-asian",
               {{"experiment", "check-hypo"}, {"model", "asian"}, {"samples", 10000},
                {"seed", kBatterySeed}, {"summary", summary("geometry-asian")}}});
  b.push_back({"hypo-kolmogorov3",
               {{"experiment", "check-hypo"}, {"model", "kolmogorov3"},
                {"summary", summary("hypo-kolmogorov3")}}});
  b.push_back({"hypo-zero-drift",
               {{"experiment", "check-hypo"},
                {"model",
                 {{"name", "zero-drift"},
                  {"B", json::array({json::array({0.0, 0.0}), json::array({0.0, 0.0})})},
                  {"sizes", json::array({1, 1})},
                  {"A", json::array({json::array({1.0})})}}},
                {"expect_hypoelliptic", false},
                {"summary", summary("hypo-zero-drift")}}});
  b.push_back({"kernel-kolmogorov2",
               {{"experiment", "kernel-table"}, {"model", "kolmogorov2"},
                {"summary", summary("kernel-kolmogorov2")}, {"csv", path("kernel-kolmogorov2.csv")}}});
  b.push_back({"taylor", {{"experiment", "taylor"}, {"summary", summary("taylor")}}});
  b.push_back({"limits-asian",
               {{"experiment", "limits"}, {"model", "asian"}, {"x", json::array({1.0, 0.0})},
                {"t", 0.0}, {"T", 1e-2}, {"dt", 1e-4}, {"n_paths", 100000},
                {"seed", kBatterySeed}, {"summary", summary("limits-asian")}},
               true});
  b.push_back({"ito-asian",
               {{"experiment", "ito"}, {"model", "asian"}, {"x", json::array({1.0, 0.0})},
                {"t", 0.0}, {"T", 0.1}, {"dt", 1e-3}, {"n_paths", 100000},
                {"seed", kBatterySeed}, {"summary", summary("ito-asian")}},
               true});
  b.push_back({"density-kolmogorov2",
               {{"experiment", "density"}, {"model", "kolmogorov2"},
                {"x", json::array({0.0, 0.0})}, {"t", 0.0}, {"T", 0.05}, {"n_paths", 200000},
                {"seed", kBatterySeed}, {"summary", summary("density-kolmogorov2")},
                {"csv", path("density-kolmogorov2.csv")}},
               true});
  for (const char* model : {"kolmogorov2", "asian"}) {
    const std::string label = std::string("moments-") + model;
    b.push_back({label,
                 {{"experiment", "simulate"}, {"model", model}, {"T", 0.1}, {"dt", 1e-3},
                  {"n_paths", 1000}, {"seed", kBatterySeed}, {"q", json::array({2, 4})},
                  {"summary", summary(label)}},
                 true});
  }
  return b;
}

int run_all(const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    err << "error: cannot create '" << out_dir.string() << "': " << e.what() << '\n';
    return 1;
  }
  bool error = false;
  std::vector<std::string> summaries;
  json repro_contracts = json::array();
  json repro_labels = json::array();
  bool repro_pass = true;
  for (const auto& entry : acceptance_battery(out_dir)) {
    out << "== " << entry.label << '\n';
    try {
      const ExperimentConfig cfg = ExperimentConfig::resolve(entry.config);
      const RunResult first = run_experiment(cfg, RunContext{reproducibility_threads().front(), true});
      const std::string text = summary_text(first.summary);
      write_text(cfg.string("summary"), text);
      summaries.push_back(cfg.string("summary"));
      for (const auto& l : first.lines) out << "  " << l << '\n';
      if (!entry.stochastic) continue;
      repro_labels.push_back(entry.label);
      for (std::size_t k = 1; k < reproducibility_threads().size(); ++k) {
        const unsigned threads = reproducibility_threads()[k];
        const RunResult again = run_experiment(cfg, RunContext{threads, false});
        const bool same = summary_text(again.summary) == text;
        repro_pass = repro_pass && same;
        const std::string name = entry.label + "_threads_" + std::to_string(threads);
        repro_contracts.push_back({{"name", name},
                                   {"pass", same},
                                   {"value", same ? 1.0 : 0.0},
                                   {"relation", "=="},
                                   {"bound", 1.0},
                                   {"note", "summary bytes equal to the 1-thread run"}});
        out << "  " << (same ? "PASS " : "FAIL ") << name << '\n';
      }
    } catch (const Error& e) {
      err << "error in " << entry.label << ": " << e.what() << '\n';
      error = true;
    } catch (const std::exception& e) {
      err << "error in " << entry.label << ": " << e.what() << '\n';
      error = true;
    }
  }
  json threads = json::array();
  for (unsigned t : reproducibility_threads()) threads.push_back(t);
  const json repro{{"schema", kSummarySchema},
                   {"experiment", "reproducibility"},
                   {"config", {{"experiment", "reproducibility"},
                               {"entries", repro_labels},
                               {"threads", threads}}},
                   {"records", json::array()},
                   {"contracts", repro_contracts},
                   {"pass", repro_pass}};
  const fs::path repro_path = out_dir / "reproducibility.json";
  write_text(repro_path, summary_text(repro));
  summaries.push_back(repro_path.string());

  try {
    const ReportTable table = build_report(summaries);
    std::ofstream csv(out_dir / "report.csv", std::ios::binary);
    write_report_csv(table, csv);
    std::ofstream md(out_dir / "report.md", std::ios::binary);
    write_report_markdown(table, md);
    out << '\n';
    write_report_markdown(table, out);
    if (error) return 1;
    return table.pass ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace hypodiff::cli
