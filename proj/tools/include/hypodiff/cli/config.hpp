#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hypodiff/model.hpp"
#include "hypodiff/types.hpp"

namespace hypodiff::cli {

/// Value categories accepted by configuration keys.
enum class FieldType {
  Number,      // any finite JSON number
  Count,       // integer >= 1
  Integer,     // integer >= 0
  Bool,
  String,
  Path,        // string; "" means "do not write"
  Point,       // array of numbers, or null for the model's default start point
  NumberList,  // non-empty array of numbers
  IntList,     // non-empty array of integers
  PathList,    // array of strings
  Model,       // built-in name or inline constant-coefficient object
  Grid,        // {"radius": number, "per_axis": count}
  Kernel,      // "covariance" or "product"
};

struct Field {
  std::string key;
  FieldType type;
  nlohmann::json default_value;  // null marks a value derived at resolution time
  std::string doc;
};

/// Experiments recognised by `run`.
const std::vector<std::string>& experiment_names();

/// Accepted keys (besides "experiment") with their defaults.
const std::vector<Field>& schema(const std::string& experiment);

/// Parses configuration text (JSON). Throws ConfigParse on malformed input.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config_file(const std::string& path);

/// Converts a command-line flag value to the JSON value of `field`: numbers,
/// comma-separated lists, true/false, or JSON text for models and grids.
/// Throws Validation on malformed values.
nlohmann::json parse_flag_value(const Field& field, const std::string& text);

/// Flag spelling of a key: "--" followed by the key with '_' replaced by '-'.
std::string flag_name(const std::string& key);

/// Validated configuration with every default materialized.
class ExperimentConfig {
 public:
  /// Throws Validation for unknown keys, wrong types, bad values and
  /// inconsistent times; fails closed.
  static ExperimentConfig resolve(const nlohmann::json& raw);

  const std::string& experiment() const noexcept { return experiment_; }
  /// The full resolved configuration, including "experiment".
  const nlohmann::json& resolved() const noexcept { return values_; }

  bool has(const std::string& key) const { return values_.contains(key); }
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string string(const std::string& key) const;
  Vector vector(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;

  /// Model built from the resolved "model" entry.
  ModelSpec model() const;

 private:
  std::string experiment_;
  nlohmann::json values_;
};

/// Drift matrix and block sizes of a resolved model entry, without validating
/// the block form (used by the hypoellipticity check).
struct RawModelShape {
  std::string name;
  Matrix B;
  std::vector<int> sizes;
};
RawModelShape raw_model_shape(const nlohmann::json& model_entry, double asian_floor);

}  // namespace hypodiff::cli
