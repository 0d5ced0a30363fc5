#include "hypodiff/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hypodiff/error.hpp"
#include "hypodiff/geometry.hpp"
#include "hypodiff/matrix_exponential.hpp"

namespace hypodiff::cli {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& message) { fail(ErrorKind::Validation, message); }

Field model_field(const std::string& name) {
  return {"model", FieldType::Model, name,
          "built-in model name or inline constant-coefficient object"};
}
Field floor_field() {
  return {"asian_floor", FieldType::Number, 0.1, "lower edge a of the Asian domain x1 > a"};
}
Field t_field() { return {"t", FieldType::Number, 0.0, "start time"}; }
Field x_field() { return {"x", FieldType::Point, nullptr, "start point (null: model default)"}; }
Field T_field() { return {"T", FieldType::Number, nullptr, "final time (null: t + horizon)"}; }
Field dt_field(json value) { return {"dt", FieldType::Number, std::move(value), "Euler step"}; }
Field paths_field(std::size_t n) { return {"n_paths", FieldType::Count, n, "Monte Carlo paths"}; }
Field seed_field(std::uint64_t seed) { return {"seed", FieldType::Integer, seed, "master seed"}; }
Field summary_field(const std::string& experiment) {
  return {"summary", FieldType::Path, experiment + "_summary.json", "JSON summary output"};
}
Field csv_field() { return {"csv", FieldType::Path, "", "CSV table output (\"\" = none)"}; }

std::map<std::string, std::vector<Field>> build_schemas() {
  std::map<std::string, std::vector<Field>> s;
  s["check-hypo"] = {
      model_field("asian"),
      floor_field(),
      {"expect_hypoelliptic", FieldType::Bool, true, "expected outcome of the rank test"},
      {"samples", FieldType::Count, 10000, "random (x, lambda) pairs for the geometry checks"},
      seed_field(1),
      summary_field("check-hypo"),
  };
  s["kernel-table"] = {
      model_field("kolmogorov2"),
      floor_field(),
      {"M", FieldType::Number, 1.0, "diffusion level of the Gaussian kernel"},
      t_field(),
      x_field(),
      T_field(),
      {"xi", FieldType::Point, nullptr, "terminal point for residuals (null: mean + offset)"},
      {"fd_step", FieldType::Number, 0.1, "finite-difference step"},
      {"grid", FieldType::Grid, json{{"radius", 3.0}, {"per_axis", 9}},
       "kernel table lattice in standard deviations"},
      summary_field("kernel-table"),
      csv_field(),
  };
  s["taylor"] = {
      seed_field(5),
      {"points", FieldType::Count, 400, "cloud size"},
      {"r_min", FieldType::Number, 1e-3, "smallest intrinsic radius"},
      {"r_max", FieldType::Number, 1e-1, "largest intrinsic radius"},
      {"trials", FieldType::Count, 5, "random polynomials in the exactness suite"},
      summary_field("taylor"),
  };
  s["simulate"] = {
      model_field("kolmogorov2"),
      floor_field(),
      t_field(),
      x_field(),
      T_field(),
      dt_field(1e-3),
      paths_field(1000),
      seed_field(1),
      {"q", FieldType::IntList, json::array({2, 4}), "even moment orders"},
      {"moment_grid", FieldType::NumberList, json::array({1e-3, 3e-3, 1e-2, 3e-2}),
       "elapsed times of the moment fit"},
      {"moment_n_paths", FieldType::Count, 20000, "paths per moment-grid point"},
      {"moment_dt", FieldType::Number, 1e-3, "Euler step cap for the moment fit"},
      {"ensemble", FieldType::Path, "", "binary ensemble output (\"\" = none)"},
      summary_field("simulate"),
      csv_field(),
  };
  s["limits"] = {
      model_field("asian"),
      floor_field(),
      t_field(),
      x_field(),
      T_field(),
      dt_field(1e-4),
      paths_field(100000),
      seed_field(1),
      {"delta", FieldType::Number, nullptr, "localization radius (null: model default)"},
      {"m", FieldType::Number, 1.0, "exponent of (T - t) in the tail mass"},
      {"a_tolerance", FieldType::Number, 0.05, "absolute tolerance on the diffusion limit"},
      {"tail_bound", FieldType::Number, 0.01, "bound on the tail mass"},
      summary_field("limits"),
  };
  s["ito"] = {
      model_field("asian"), floor_field(), t_field(),         x_field(),
      T_field(),            dt_field(1e-3), paths_field(100000), seed_field(1),
      summary_field("ito"),
  };
  s["density"] = {
      model_field("kolmogorov2"),
      floor_field(),
      t_field(),
      x_field(),
      T_field(),
      dt_field(nullptr),
      paths_field(200000),
      seed_field(1),
      {"eps", FieldType::Number, 0.1, "cylinder parameter"},
      {"bandwidth", FieldType::Number, 0.12, "relative KDE bandwidth c"},
      {"kernel", FieldType::Kernel, "covariance", "KDE kernel shape"},
      {"grid", FieldType::Grid, json{{"radius", 3.0}, {"per_axis", 9}},
       "central lattice in standard deviations"},
      {"inner_radius", FieldType::Number, 0.5, "radius of the inner ball V"},
      {"n_max", FieldType::Count, 4, "localization terms"},
      {"sup_bound", FieldType::Number, 0.05, "relative sup-norm tolerance"},
      {"sigma2_bound", FieldType::Number, 0.01, "bound on P(sigma_2 < T)"},
      {"exit_grid", FieldType::NumberList, json::array({0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0}),
       "elapsed times of the exit-probability fit"},
      {"exit_n_paths", FieldType::Count, 100000, "paths per exit-grid point"},
      {"exit_dt", FieldType::Number, 1e-3, "Euler step cap for the exit fit"},
      summary_field("density"),
      csv_field(),
  };
  s["report"] = {
      {"inputs", FieldType::PathList, json::array(), "JSON summaries to merge"},
      {"csv", FieldType::Path, "report.csv", "CSV table output"},
      {"markdown", FieldType::Path, "report.md", "Markdown table output"},
  };
  return s;
}

const std::map<std::string, std::vector<Field>>& schemas() {
  static const auto s = build_schemas();
  return s;
}

const std::map<std::string, double>& horizons() {
  static const std::map<std::string, double> h{{"kernel-table", 1.0}, {"simulate", 1.0},
                                               {"limits", 1e-2},      {"ito", 0.1},
                                               {"density", 0.05}};
  return h;
}

bool is_integral(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d && d >= 0.0 && d < 1.8e19;
}

std::uint64_t as_u64(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) invalid("negative integer");
    return static_cast<std::uint64_t>(i);
  }
  return static_cast<std::uint64_t>(v.get<double>());
}

bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

bool number_array(const json& v, bool allow_empty = false) {
  if (!v.is_array() || (!allow_empty && v.empty())) return false;
  return std::all_of(v.begin(), v.end(), finite_number);
}

Matrix parse_matrix(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) invalid(what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].is_array() ? v[0].size() : 0);
  if (cols == 0) invalid(what + " must be a non-empty array of rows");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[i];
    if (!number_array(row) || static_cast<Eigen::Index>(row.size()) != cols)
      invalid(what + " rows must be numeric and of equal length");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[j].get<double>();
  }
  return m;
}

Vector parse_vector(const json& v, const std::string& what) {
  if (!number_array(v)) invalid(what + " must be a non-empty numeric array");
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return x;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& e : builtin_models()) names.push_back(e.name);
  return names;
}

/// Inline constant-coefficient model with defaults materialized.
json normalize_inline_model(const json& m) {
  static const std::vector<std::string> keys{"name", "B", "sizes", "A", "a", "domain", "T0"};
  for (const auto& [k, v] : m.items()) {
    (void)v;
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      invalid("unknown key '" + k + "' in inline model");
  }
  for (const char* k : {"B", "sizes", "A"})
    if (!m.contains(k)) invalid(std::string("inline model needs '") + k + "'");
  json out;
  if (m.contains("name") && !m["name"].is_string()) invalid("model name must be a string");
  out["name"] = m.value("name", std::string("inline"));
  const Matrix B = parse_matrix(m["B"], "model.B");
  if (B.rows() != B.cols()) invalid("model.B must be square");
  const int d = static_cast<int>(B.rows());
  const json& sizes = m["sizes"];
  if (!sizes.is_array() || sizes.empty()) invalid("model.sizes must be a non-empty array");
  int total = 0;
  for (const auto& s : sizes) {
    if (!is_integral(s) || as_u64(s) < 1) invalid("model.sizes entries must be integers >= 1");
    total += static_cast<int>(as_u64(s));
  }
  if (total != d) invalid("model.sizes must sum to the dimension of B");
  const int p0 = static_cast<int>(as_u64(sizes[0]));
  const Matrix A = parse_matrix(m["A"], "model.A");
  if (A.rows() != p0 || A.cols() != p0) invalid("model.A must be p0 x p0");
  Vector a = Vector::Zero(p0);
  if (m.contains("a")) {
    a = parse_vector(m["a"], "model.a");
    if (a.size() != p0) invalid("model.a must have p0 entries");
  }
  json domain = "whole";
  if (m.contains("domain")) {
    const json& dm = m["domain"];
    if (dm.is_string()) {
      if (dm.get<std::string>() != "whole") invalid("model.domain must be \"whole\" or a box");
    } else if (dm.is_object()) {
      for (const auto& [k, v] : dm.items()) {
        (void)v;
        if (k != "lower" && k != "upper") invalid("unknown key '" + k + "' in model.domain");
      }
      if (!dm.contains("lower") || !dm.contains("upper"))
        invalid("model.domain needs 'lower' and 'upper'");
      const Vector lo = parse_vector(dm["lower"], "model.domain.lower");
      const Vector hi = parse_vector(dm["upper"], "model.domain.upper");
      if (lo.size() != d || hi.size() != d || (hi - lo).minCoeff() <= 0.0)
        invalid("model.domain must be a non-empty box in R^d");
      domain = json{{"lower", vector_to_json(lo)}, {"upper", vector_to_json(hi)}};
    } else {
      invalid("model.domain must be \"whole\" or a box");
    }
  }
  double T0 = 1.0;
  if (m.contains("T0")) {
    if (!finite_number(m["T0"]) || m["T0"].get<double>() <= 0.0) invalid("model.T0 must be > 0");
    T0 = m["T0"].get<double>();
  }
  out["B"] = matrix_to_json(B);
  out["sizes"] = sizes;
  out["A"] = matrix_to_json(A);
  out["a"] = vector_to_json(a);
  out["domain"] = domain;
  out["T0"] = T0;
  return out;
}

void check_type(const Field& f, const json& v) {
  const std::string& k = f.key;
  switch (f.type) {
    case FieldType::Number:
      if (!finite_number(v)) invalid("'" + k + "' must be a finite number");
      return;
    case FieldType::Count:
      if (!is_integral(v) || as_u64(v) < 1) invalid("'" + k + "' must be an integer >= 1");
      return;
    case FieldType::Integer:
      if (!is_integral(v)) invalid("'" + k + "' must be an integer >= 0");
      return;
    case FieldType::Bool:
      if (!v.is_boolean()) invalid("'" + k + "' must be true or false");
      return;
    case FieldType::String:
    case FieldType::Path:
      if (!v.is_string()) invalid("'" + k + "' must be a string");
      return;
    case FieldType::Point:
      if (!v.is_null() && !number_array(v)) invalid("'" + k + "' must be a numeric array");
      return;
    case FieldType::NumberList:
      if (!number_array(v)) invalid("'" + k + "' must be a non-empty numeric array");
      return;
    case FieldType::IntList:
      if (!v.is_array() || v.empty() ||
          !std::all_of(v.begin(), v.end(), [](const json& e) { return is_integral(e); }))
        invalid("'" + k + "' must be a non-empty array of integers");
      return;
    case FieldType::PathList:
      if (!v.is_array() ||
          !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); }))
        invalid("'" + k + "' must be an array of strings");
      return;
    case FieldType::Model:
      if (!v.is_string() && !v.is_object())
        invalid("'model' must be a built-in name or an inline object");
      return;
    case FieldType::Grid: {
      if (!v.is_object()) invalid("'grid' must be an object");
      for (const auto& [gk, gv] : v.items()) {
        (void)gv;
        if (gk != "radius" && gk != "per_axis") invalid("unknown key '" + gk + "' in grid");
      }
      if (v.contains("radius") && (!finite_number(v["radius"]) || v["radius"].get<double>() <= 0))
        invalid("grid.radius must be > 0");
      if (v.contains("per_axis") && (!is_integral(v["per_axis"]) || as_u64(v["per_axis"]) < 2))
        invalid("grid.per_axis must be an integer >= 2");
      return;
    }
    case FieldType::Kernel:
      if (!v.is_string() || (v != "covariance" && v != "product"))
        invalid("'kernel' must be \"covariance\" or \"product\"");
      return;
  }
}

/// Integers are stored canonically so that 1e5 and 100000 resolve identically.
json canonical(const Field& f, const json& v, const json& def) {
  switch (f.type) {
    case FieldType::Count:
    case FieldType::Integer:
      return as_u64(v);
    case FieldType::IntList: {
      json out = json::array();
      for (const auto& e : v) out.push_back(as_u64(e));
      return out;
    }
    case FieldType::Number:
      return v.get<double>();
    case FieldType::NumberList:
    case FieldType::Point: {
      if (v.is_null()) return v;
      json out = json::array();
      for (const auto& e : v) out.push_back(e.get<double>());
      return out;
    }
    case FieldType::Grid: {
      json out = def;
      if (v.contains("radius")) out["radius"] = v["radius"].get<double>();
      if (v.contains("per_axis")) out["per_axis"] = as_u64(v["per_axis"]);
      return out;
    }
    case FieldType::Model:
      if (v.is_string()) {
        const auto names = builtin_names();
        if (std::find(names.begin(), names.end(), v.get<std::string>()) == names.end())
          invalid("unknown model '" + v.get<std::string>() + "'");
        return v;
      }
      return normalize_inline_model(v);
    default:
      return v;
  }
}

ModelSpec build_model(const json& entry, double floor) {
  if (entry.is_string()) return make_builtin(entry.get<std::string>(), floor);
  const Matrix B = parse_matrix(entry["B"], "model.B");
  std::vector<int> sizes;
  for (const auto& s : entry["sizes"]) sizes.push_back(static_cast<int>(as_u64(s)));
  const Matrix A = parse_matrix(entry["A"], "model.A");
  const Vector a = parse_vector(entry["a"], "model.a");
  const int d = static_cast<int>(B.rows());
  Domain domain = Domain::whole_space(d);
  if (entry["domain"].is_object())
    domain = Domain::box(parse_vector(entry["domain"]["lower"], "lower"),
                         parse_vector(entry["domain"]["upper"], "upper"));
  ModelSpec m = constant_model(entry["name"].get<std::string>(), B, sizes, A, a, domain);
  m.T0 = entry["T0"].get<double>();
  return m;
}

Vector default_start(const ModelSpec& m) {
  if (m.name == "asian") {
    Vector x = Vector::Zero(m.d);
    x(0) = 1.0;
    return x;
  }
  Vector x = Vector::Zero(m.d);
  if (!m.domain.contains(x)) invalid("model has no default start point; set 'x'");
  return x;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"check-hypo", "kernel-table", "taylor", "simulate",
                                              "limits",     "ito",          "density", "report"};
  return names;
}

const std::vector<Field>& schema(const std::string& experiment) {
  const auto it = schemas().find(experiment);
  if (it == schemas().end()) invalid("unknown experiment '" + experiment + "'");
  return it->second;
}

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigParse, std::string("malformed configuration: ") + e.what());
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigParse, "cannot read configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

json parse_flag_value(const Field& field, const std::string& text) {
  auto number = [&](const std::string& s) -> json {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      if (std::floor(v) == v && std::abs(v) < 9e15 && s.find_first_of(".eE") == std::string::npos)
        return static_cast<std::int64_t>(v);
      return v;
    } catch (const std::exception&) {
      invalid("flag " + flag_name(field.key) + ": '" + s + "' is not a number");
    }
  };
  auto list = [&](const std::string& s) {
    json out = json::array();
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(number(item));
    return out;
  };
  auto json_text = [&](const std::string& s) {
    try {
      return json::parse(s);
    } catch (const json::parse_error&) {
      invalid("flag " + flag_name(field.key) + ": malformed JSON value");
    }
  };
  switch (field.type) {
    case FieldType::Number:
    case FieldType::Count:
    case FieldType::Integer:
      return number(text);
    case FieldType::Bool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      invalid("flag " + flag_name(field.key) + " expects true or false");
    case FieldType::Point:
      if (text == "null" || text == "auto") return nullptr;
      return list(text);
    case FieldType::NumberList:
    case FieldType::IntList:
      return list(text);
    case FieldType::PathList: {
      json out = json::array();
      std::stringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) out.push_back(item);
      return out;
    }
    case FieldType::Model:
      if (!text.empty() && text.front() == '{') return json_text(text);
      return text;
    case FieldType::Grid:
      return json_text(text);
    default:
      return text;
  }
}

ExperimentConfig ExperimentConfig::resolve(const json& raw) {
  if (!raw.is_object()) invalid("configuration must be a JSON object");
  if (!raw.contains("experiment") || !raw["experiment"].is_string())
    invalid("configuration needs a string 'experiment'");
  ExperimentConfig cfg;
  cfg.experiment_ = raw["experiment"].get<std::string>();
  const auto& fields = schema(cfg.experiment_);
  for (const auto& [k, v] : raw.items()) {
    (void)v;
    if (k == "experiment") continue;
    const bool known =
        std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return f.key == k; });
    if (!known) invalid("unknown key '" + k + "' for experiment '" + cfg.experiment_ + "'");
  }
  json& out = cfg.values_;
  out["experiment"] = cfg.experiment_;
  for (const auto& f : fields) {
    const json& v = raw.contains(f.key) ? raw[f.key] : f.default_value;
    if (!v.is_null()) check_type(f, v);
    out[f.key] = v.is_null() ? v : canonical(f, v, f.default_value);
  }
  if (cfg.experiment_ == "report" || cfg.experiment_ == "taylor") {
    if (cfg.experiment_ == "taylor" && !(out["r_max"] > out["r_min"] && out["r_min"] > 0.0))
      invalid("need 0 < r_min < r_max");
    return cfg;
  }
  if (cfg.experiment_ == "check-hypo") {
    raw_model_shape(out["model"], out["asian_floor"].get<double>());
    return cfg;
  }
  if (out["asian_floor"].get<double>() <= 0.0) invalid("'asian_floor' must be > 0");

  const ModelSpec m = cfg.model();
  if (out["x"].is_null()) out["x"] = vector_to_json(default_start(m));
  const Vector x = cfg.vector("x");
  if (x.size() != m.d) invalid("'x' must have " + std::to_string(m.d) + " entries");
  if (!m.domain.contains(x)) invalid("'x' lies outside the model domain");
  const double t = cfg.number("t");
  if (t < 0.0) invalid("'t' must be >= 0");
  if (out["T"].is_null()) out["T"] = t + horizons().at(cfg.experiment_);
  const double T = cfg.number("T");
  if (!(T > t)) invalid("need T > t");
  if (T > m.T0) invalid("'T' exceeds the model horizon T0 = " + std::to_string(m.T0));
  if (cfg.has("dt")) {
    if (out["dt"].is_null()) out["dt"] = (T - t) / 500.0;
    if (!(cfg.number("dt") > 0.0)) invalid("'dt' must be > 0");
  }
  if (cfg.has("n_paths") && cfg.count("n_paths") < 2) invalid("'n_paths' must be >= 2");
  if (cfg.has("delta")) {
    if (out["delta"].is_null()) out["delta"] = default_delta(m, x);
    if (!(cfg.number("delta") > 0.0)) invalid("'delta' must be > 0");
  }
  if (cfg.experiment_ == "kernel-table") {
    if (!(cfg.number("M") > 0.0)) invalid("'M' must be > 0");
    if (!(cfg.number("fd_step") > 0.0)) invalid("'fd_step' must be > 0");
    if (out["xi"].is_null()) {
      Vector xi = mat_exp(m.B, T - t) * x;
      const double offsets[] = {0.3, 0.2, 0.1, 0.05};
      for (int i = 0; i < m.d; ++i) xi(i) += offsets[std::min(i, 3)];
      out["xi"] = vector_to_json(xi);
    }
    if (cfg.vector("xi").size() != m.d) invalid("'xi' must have d entries");
  }
  if (cfg.experiment_ == "simulate") {
    for (int q : cfg.integers("q"))
      if (q < 2 || q % 2 != 0) invalid("'q' entries must be even and >= 2");
    for (double s : cfg.numbers("moment_grid"))
      if (!(s > 0.0) || t + s > m.T0) invalid("'moment_grid' entries must lie in (0, T0 - t]");
    if (!(cfg.number("moment_dt") > 0.0)) invalid("'moment_dt' must be > 0");
  }
  if (cfg.experiment_ == "density") {
    const double eps = cfg.number("eps");
    if (!(eps > 0.0 && eps < 1.0)) invalid("'eps' must lie in (0, 1)");
    if (!(cfg.number("bandwidth") > 0.0)) invalid("'bandwidth' must be > 0");
    if (!(cfg.number("inner_radius") > 0.0)) invalid("'inner_radius' must be > 0");
    for (double s : cfg.numbers("exit_grid"))
      if (!(s > 0.0) || s > m.T0) invalid("'exit_grid' entries must lie in (0, T0]");
    if (!(cfg.number("exit_dt") > 0.0)) invalid("'exit_dt' must be > 0");
    if (cfg.count("exit_n_paths") < 2) invalid("'exit_n_paths' must be >= 2");
  }
  return cfg;
}

double ExperimentConfig::number(const std::string& key) const {
  return values_.at(key).get<double>();
}
std::size_t ExperimentConfig::count(const std::string& key) const {
  return static_cast<std::size_t>(values_.at(key).get<std::uint64_t>());
}
std::uint64_t ExperimentConfig::integer(const std::string& key) const {
  return values_.at(key).get<std::uint64_t>();
}
bool ExperimentConfig::flag(const std::string& key) const { return values_.at(key).get<bool>(); }
std::string ExperimentConfig::string(const std::string& key) const {
  return values_.at(key).get<std::string>();
}
Vector ExperimentConfig::vector(const std::string& key) const {
  return parse_vector(values_.at(key), key);
}
std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  return values_.at(key).get<std::vector<double>>();
}
std::vector<int> ExperimentConfig::integers(const std::string& key) const {
  return values_.at(key).get<std::vector<int>>();
}
std::vector<std::string> ExperimentConfig::strings(const std::string& key) const {
  return values_.at(key).get<std::vector<std::string>>();
}

ModelSpec ExperimentConfig::model() const {
  return build_model(values_.at("model"), values_.at("asian_floor").get<double>());
}

RawModelShape raw_model_shape(const json& entry, double asian_floor) {
  if (entry.is_string()) {
    const ModelSpec m = make_builtin(entry.get<std::string>(), asian_floor);
    return {m.name, m.B, m.structure.sizes()};
  }
  RawModelShape out;
  out.name = entry["name"].get<std::string>();
  out.B = parse_matrix(entry["B"], "model.B");
  for (const auto& s : entry["sizes"]) out.sizes.push_back(static_cast<int>(as_u64(s)));
  return out;
}

}  // namespace hypodiff::cli
