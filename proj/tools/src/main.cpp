#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "hypodiff/cli/config.hpp"
#include "hypodiff/cli/experiments.hpp"
#include "hypodiff/error.hpp"
#include "hypodiff/parallel.hpp"

using namespace hypodiff;
using namespace hypodiff::cli;

namespace {

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;  // key -> raw flag text
  std::vector<std::string> positional;
  bool all = false;
  std::string out_dir = "hypodiff-report";
};

int execute(const std::string& experiment, Subcommand& sc) {
  try {
    if (experiment == "report" && sc.all) return run_all(sc.out_dir, std::cout, std::cerr);
    nlohmann::json raw = sc.config_path.empty() ? nlohmann::json::object()
                                                : load_config_file(sc.config_path);
    if (!raw.is_object()) fail(ErrorKind::Validation, "configuration must be a JSON object");
    if (raw.contains("experiment") && raw["experiment"] != experiment)
      fail(ErrorKind::Validation, "configuration is for experiment '" +
                                      raw["experiment"].dump() + "', not '" + experiment + "'");
    raw["experiment"] = experiment;
    for (const auto& field : schema(experiment)) {
      const auto it = sc.values.find(field.key);
      if (it != sc.values.end() && sc.app->count(flag_name(field.key)) > 0)
        raw[field.key] = parse_flag_value(field, it->second);
    }
    if (!sc.positional.empty()) {
      nlohmann::json inputs = raw.value("inputs", nlohmann::json::array());
      for (const auto& p : sc.positional) inputs.push_back(p);
      raw["inputs"] = inputs;
    }
    return run(raw, RunContext{}, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for degenerate Kolmogorov diffusions.\n"
               "Default thread count: environment variable " +
               std::string(kThreadsEnv) + "."};
  app.require_subcommand(1);
  std::map<std::string, Subcommand> subs;
  for (const auto& name : experiment_names()) {
    Subcommand& sc = subs[name];
    sc.app = app.add_subcommand(name, "run the " + name + " experiment");
    sc.app->add_option("--config", sc.config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    for (const auto& field : schema(name))
      sc.app->add_option(flag_name(field.key), sc.values[field.key], field.doc);
    if (name == "report") {
      sc.app->add_option("summaries", sc.positional, "JSON summaries to merge");
      sc.app->add_flag("--all", sc.all, "run the full acceptance battery");
      sc.app->add_option("--out-dir", sc.out_dir, "output directory for --all")->capture_default_str();
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (auto& [name, sc] : subs)
    if (sc.app->parsed()) return execute(name, sc);
  return 1;
}
