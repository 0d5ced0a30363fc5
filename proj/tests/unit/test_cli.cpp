#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "hypodiff/cli/config.hpp"
#include "hypodiff/cli/experiments.hpp"
#include "hypodiff/error.hpp"

using namespace hypodiff;
using namespace hypodiff::cli;
using nlohmann::json;

namespace {

using Summaries = std::vector<std::pair<std::string, json>>;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::InvalidArgument;
}

int run_quiet(const json& raw, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = run(raw, RunContext{1, false}, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hypodiff-cli-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json fixture(bool pass, std::uint64_t seed) {
  return {{"schema", kSummarySchema},
          {"experiment", "limits"},
          {"config", {{"experiment", "limits"}, {"model", "asian"}, {"seed", seed}}},
          {"records", json::array()},
          {"contracts", json::array({{{"name", "tail_mass"}, {"pass", pass}}})},
          {"pass", pass}};
}

}  // namespace

TEST(Config, DefaultsAreMaterialized) {
  const auto cfg = ExperimentConfig::resolve({{"experiment", "limits"}});
  const json& j = cfg.resolved();
  EXPECT_EQ(j["model"], "asian");
  EXPECT_EQ(j["x"], json::array({1.0, 0.0}));
  EXPECT_DOUBLE_EQ(j["T"].get<double>(), 0.01);
  EXPECT_FALSE(j["delta"].is_null());
  EXPECT_EQ(j["n_paths"], 100000u);
  const auto density = ExperimentConfig::resolve({{"experiment", "density"}, {"T", 0.1}});
  EXPECT_DOUBLE_EQ(density.number("dt"), 0.1 / 500);
}

TEST(Config, FailsClosed) {
  EXPECT_EQ(kind_of([] { ExperimentConfig::resolve({{"experiment", "limits"}, {"n_path", 5}}); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ExperimentConfig::resolve({{"experiment", "limits"}, {"n_paths", 0}}); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ExperimentConfig::resolve({{"experiment", "nope"}}); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ExperimentConfig::resolve({{"experiment", "ito"}, {"model", "heston"}}); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ExperimentConfig::resolve({{"experiment", "ito"}, {"T", 50.0}}); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] {
              ExperimentConfig::resolve(
                  {{"experiment", "ito"}, {"model", {{"B", {{0.0}}}, {"sizes", {1}}, {"A", {{1.0}}},
                                                     {"colour", "red"}}}});
            }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { parse_config_text("{\"experiment\": "); }), ErrorKind::ConfigParse);
}

TEST(Config, IntegralFloatsAndFlags) {
  const auto a = ExperimentConfig::resolve({{"experiment", "limits"}, {"n_paths", 1e5}});
  const auto b = ExperimentConfig::resolve({{"experiment", "limits"}, {"n_paths", 100000}});
  EXPECT_EQ(a.resolved().dump(), b.resolved().dump());
  const auto& fields = schema("limits");
  auto field = [&](const std::string& k) {
    for (const auto& f : fields)
      if (f.key == k) return f;
    return fields.front();
  };
  EXPECT_EQ(parse_flag_value(field("x"), "1,0.5"), json::array({1, 0.5}));
  EXPECT_EQ(parse_flag_value(field("n_paths"), "2000"), 2000);
  EXPECT_EQ(kind_of([&] { parse_flag_value(field("dt"), "fast"); }), ErrorKind::Validation);
  EXPECT_EQ(flag_name("n_paths"), "--n-paths");
}

TEST(Run, ExitCodes) {
  std::string out;
  EXPECT_EQ(run_quiet({{"experiment", "check-hypo"}, {"samples", 100}}, &out), 0);
  EXPECT_NE(out.find("rank 2 of 2, PASS"), std::string::npos);
  const json zero{{"name", "zero"}, {"B", {{0.0, 0.0}, {0.0, 0.0}}}, {"sizes", {1, 1}}, {"A", {{1.0}}}};
  EXPECT_EQ(run_quiet({{"experiment", "check-hypo"}, {"model", zero}}), 2);
  EXPECT_EQ(run_quiet({{"experiment", "check-hypo"}, {"model", zero}, {"expect_hypoelliptic", false}}),
            0);
  EXPECT_EQ(run_quiet({{"experiment", "limits"}, {"n_paths", 0}}), 1);
}

TEST(Run, SummaryIsDeterministicAndEmbedsConfig) {
  const json raw{{"experiment", "ito"}, {"n_paths", 500}, {"seed", 3}};
  const auto cfg = ExperimentConfig::resolve(raw);
  const auto a = run_experiment(cfg, RunContext{1, false});
  const auto b = run_experiment(cfg, RunContext{3, false});
  EXPECT_EQ(summary_text(a.summary), summary_text(b.summary));
  EXPECT_EQ(a.summary["config"], cfg.resolved());
  for (const auto& r : a.summary["records"])
    for (const char* key : {"name", "estimate", "se", "target", "elapsed", "n_paths", "seed"})
      EXPECT_TRUE(r.contains(key)) << key;
  EXPECT_EQ(summary_text(a.summary).find("thread"), std::string::npos);
}

TEST(Run, InlineConstantModelSimulates) {
  const json model{{"name", "inline2"},
                   {"B", {{0.0, 0.0}, {1.0, 0.0}}},
                   {"sizes", {1, 1}},
                   {"A", {{2.0}}},
                   {"T0", 5.0}};
  const auto cfg = ExperimentConfig::resolve(
      {{"experiment", "simulate"}, {"model", model}, {"n_paths", 200}, {"moment_n_paths", 2000}});
  const auto r = run_experiment(cfg, RunContext{1, false});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.summary["config"]["model"]["domain"], "whole");
}

TEST(Report, EmptySeedsAndRollUp) {
  const ReportTable empty = build_report(std::vector<std::string>{});
  EXPECT_TRUE(empty.rows.empty());
  EXPECT_TRUE(empty.pass);
  EXPECT_EQ(run_quiet({{"experiment", "report"}, {"csv", ""}, {"markdown", ""}}), 0);

  const ReportTable two = build_report(Summaries{{"a.json", fixture(true, 1)}, {"b.json", fixture(true, 2)}});
  ASSERT_EQ(two.rows.size(), 2u);
  EXPECT_EQ(two.rows[0].seed, "1");
  EXPECT_EQ(two.rows[1].seed, "2");
  EXPECT_TRUE(two.pass);

  const ReportTable mixed = build_report(Summaries{{"a.json", fixture(true, 1)}, {"b.json", fixture(false, 2)}});
  EXPECT_FALSE(mixed.pass);
  EXPECT_EQ(mixed.rows[1].failed, std::vector<std::string>{"tail_mass"});
  std::ostringstream csv, md;
  write_report_csv(mixed, csv);
  write_report_markdown(mixed, md);
  EXPECT_NE(csv.str().find("b.json,limits,asian,2,1,1,FAIL,tail_mass"), std::string::npos);
  EXPECT_NE(md.str().find("Overall: FAIL"), std::string::npos);

  const auto dir = temp_dir("report");
  std::ofstream(dir / "ok.json") << fixture(true, 1).dump();
  std::ofstream(dir / "bad.json") << fixture(false, 2).dump();
  EXPECT_EQ(run_quiet({{"experiment", "report"},
                       {"inputs", {(dir / "ok.json").string(), (dir / "bad.json").string()}},
                       {"csv", ""},
                       {"markdown", ""}}),
            2);
}

TEST(Report, SchemaMismatch) {
  json broken = fixture(true, 1);
  broken.erase("contracts");
  EXPECT_EQ(kind_of([&] { build_report(Summaries{{"x.json", broken}}); }), ErrorKind::SchemaMismatch);
  json lying = fixture(false, 1);
  lying["pass"] = true;
  EXPECT_EQ(kind_of([&] { build_report(Summaries{{"y.json", lying}}); }), ErrorKind::SchemaMismatch);
  const auto dir = temp_dir("schema");
  std::ofstream(dir / "junk.json") << "not json";
  EXPECT_EQ(kind_of([&] { build_report(std::vector<std::string>{(dir / "junk.json").string()}); }),
            ErrorKind::SchemaMismatch);
}

TEST(Battery, CoversEveryCriterion) {
  const auto b = acceptance_battery("out");
  std::set<std::string> experiments;
  for (const auto& e : b) {
    experiments.insert(e.config["experiment"].get<std::string>());
    EXPECT_NO_THROW(ExperimentConfig::resolve(e.config)) << e.label;
  }
  for (const char* name : {"check-hypo", "kernel-table", "taylor", "simulate", "limits", "ito", "density"})
    EXPECT_TRUE(experiments.count(name)) << name;
}
