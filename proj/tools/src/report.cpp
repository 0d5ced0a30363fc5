#include <fstream>
#include <ostream>
#include <sstream>

#include "hypodiff/cli/experiments.hpp"
#include "hypodiff/error.hpp"

namespace hypodiff::cli {
namespace {

using nlohmann::json;

[[noreturn]] void mismatch(const std::string& file, const std::string& why) {
  fail(ErrorKind::SchemaMismatch, "summary '" + file + "': " + why);
}

std::string model_label(const json& config) {
  if (!config.contains("model")) return "-";
  const json& m = config["model"];
  if (m.is_string()) return m.get<std::string>();
  if (m.is_object() && m.contains("name") && m["name"].is_string())
    return m["name"].get<std::string>();
  return "-";
}

std::string seed_label(const json& config) {
  if (!config.contains("seed") || !config["seed"].is_number_unsigned()) return "-";
  return std::to_string(config["seed"].get<std::uint64_t>());
}

ReportRow parse_row(const std::string& file, const json& s) {
  if (!s.is_object()) mismatch(file, "not a JSON object");
  if (!s.contains("schema") || s["schema"] != kSummarySchema) mismatch(file, "unknown schema");
  if (!s.contains("experiment") || !s["experiment"].is_string())
    mismatch(file, "missing 'experiment'");
  if (!s.contains("config") || !s["config"].is_object()) mismatch(file, "missing 'config'");
  if (!s.contains("contracts") || !s["contracts"].is_array()) mismatch(file, "missing 'contracts'");
  if (!s.contains("pass") || !s["pass"].is_boolean()) mismatch(file, "missing 'pass'");
  ReportRow row;
  row.file = file;
  row.experiment = s["experiment"].get<std::string>();
  row.model = model_label(s["config"]);
  row.seed = seed_label(s["config"]);
  bool all = true;
  for (const auto& c : s["contracts"]) {
    if (!c.is_object() || !c.contains("name") || !c["name"].is_string() || !c.contains("pass") ||
        !c["pass"].is_boolean())
      mismatch(file, "malformed contract entry");
    ++row.contracts;
    if (!c["pass"].get<bool>()) {
      all = false;
      row.failed.push_back(c["name"].get<std::string>());
    }
  }
  if (all != s["pass"].get<bool>()) mismatch(file, "roll-up disagrees with contracts");
  row.pass = all;
  return row;
}

std::string joined(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

ReportTable build_report(const std::vector<std::pair<std::string, json>>& summaries) {
  ReportTable table;
  for (const auto& [file, s] : summaries) {
    table.rows.push_back(parse_row(file, s));
    table.pass = table.pass && table.rows.back().pass;
  }
  return table;
}

ReportTable build_report(const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, json>> summaries;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) mismatch(p, "cannot be read");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      summaries.emplace_back(p, json::parse(buf.str()));
    } catch (const json::parse_error&) {
      mismatch(p, "not valid JSON");
    }
  }
  return build_report(summaries);
}

void write_report_csv(const ReportTable& table, std::ostream& out) {
  out << "file,experiment,model,seed,contracts,failed,status,failed_contracts\n";
  for (const auto& r : table.rows) {
    out << csv_cell(r.file) << ',' << csv_cell(r.experiment) << ',' << csv_cell(r.model) << ','
        << r.seed << ',' << r.contracts << ',' << r.failed.size() << ','
        << (r.pass ? "PASS" : "FAIL") << ',' << csv_cell(joined(r.failed, ";")) << '\n';
  }
}

void write_report_markdown(const ReportTable& table, std::ostream& out) {
  out << "| file | experiment | model | seed | contracts | failed | status |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : table.rows) {
    out << "| " << r.file << " | " << r.experiment << " | " << r.model << " | " << r.seed << " | "
        << r.contracts << " | " << (r.failed.empty() ? "-" : joined(r.failed, ", ")) << " | "
        << (r.pass ? "PASS" : "FAIL") << " |\n";
  }
  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += !r.pass;
  out << "\nOverall: " << (table.pass ? "PASS" : "FAIL") << " (" << table.rows.size()
      << " runs, " << failed << " failed)\n";
}

}  // namespace hypodiff::cli
