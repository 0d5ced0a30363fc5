#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hypodiff/cli/config.hpp"

namespace hypodiff::cli {

inline constexpr const char* kSummarySchema = "hypodiff.summary.v1";

/// Process-level settings that must not influence results.
struct RunContext {
  unsigned threads = 0;          // 0: HYPODIFF_THREADS or hardware concurrency
  bool write_artifacts = true;   // summary, CSV and ensemble files
};

/// Outcome of one experiment: the JSON summary (resolved config, records,
/// contracts, roll-up) plus human-readable lines.
struct RunResult {
  nlohmann::json summary;
  bool pass = false;
  std::vector<std::string> lines;
};

/// Executes a resolved configuration. CSV/ensemble artifacts named in the
/// configuration are written when ctx.write_artifacts is set; the summary
/// file is written by run().
RunResult run_experiment(const ExperimentConfig& config, const RunContext& ctx);

/// Resolves, runs and writes the summary. Returns 0 on pass, 2 on contract
/// failure and 1 on error (reported on `err`).
int run(const nlohmann::json& raw_config, const RunContext& ctx, std::ostream& out,
        std::ostream& err);

/// Serialized summary text: the exact bytes written to summary files.
std::string summary_text(const nlohmann::json& summary);

/// One row of a consolidated report.
struct ReportRow {
  std::string file;
  std::string experiment;
  std::string model;
  std::string seed;
  std::size_t contracts = 0;
  std::vector<std::string> failed;
  bool pass = false;
};

struct ReportTable {
  std::vector<ReportRow> rows;
  bool pass = true;  // roll-up; an empty table passes
};

/// Reads and validates summaries. Throws SchemaMismatch for unreadable or
/// malformed files.
ReportTable build_report(const std::vector<std::string>& paths);
ReportTable build_report(const std::vector<std::pair<std::string, nlohmann::json>>& summaries);
void write_report_csv(const ReportTable& table, std::ostream& out);
void write_report_markdown(const ReportTable& table, std::ostream& out);

/// A named configuration of the acceptance battery.
struct BatteryEntry {
  std::string label;
  nlohmann::json config;
  bool stochastic = false;  // included in the thread-count reproducibility check
};

/// The acceptance battery with the given output directory for artifacts.
std::vector<BatteryEntry> acceptance_battery(const std::filesystem::path& out_dir);

/// Thread counts compared by the reproducibility check.
const std::vector<unsigned>& reproducibility_threads();

/// Runs `report --all`: every battery entry, the reproducibility check across
/// reproducibility_threads(), and the consolidated report. Returns 0/2/1.
int run_all(const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace hypodiff::cli
