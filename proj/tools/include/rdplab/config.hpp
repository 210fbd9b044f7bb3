#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdp/elliptic.hpp"
#include "rdp/grid.hpp"
#include "rdp/measures.hpp"

namespace rdplab {

using json = nlohmann::json;

/// Schema violation; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ScenarioConfig {
  std::string name;
  std::string task;
  int dim = 2;
  std::vector<rdp::AxisRange> box;
  double h = 0.0;
  std::vector<double> refine{1.0};  // the task runs at h / f for each factor f
  double rel_tol = 1e-8;
  std::string output;               // from the config; may be empty
  json doc;                         // the whole document, for task-specific keys
  std::filesystem::path source;
};

extern const std::vector<std::string> kTasks;

/// Validates the common keys and the task name. Task keys are read later through
/// the helpers below, which throw ConfigError with the full key path.
ScenarioConfig parse_config(const json& doc, const std::filesystem::path& source = {});
ScenarioConfig load_config(const std::filesystem::path& file);

/// Typed access to a JSON object with key paths in every error.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  Node at(const std::string& key) const;  // required
  std::string key_path(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double positive(const std::string& key) const;
  double positive(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  rdp::Point point(const std::string& key, int dim) const;
  std::vector<double> numbers(const std::string& key) const;

 private:
  const json* j_;
  std::string path_;
};

rdp::Point to_point(const Node& parent, const std::string& key, int dim);

/// Node sets: {"type": "ball" | "annulus" | "halfspace" | "box" | "point" | "all" |
/// "union" | "intersection" | "difference", ...}.
rdp::NodeSet build_set(const rdp::Grid& grid, const Node& spec);

/// Scalar functions: a number, or {"type": "constant" | "linear" | "radial_power" |
/// "indicator" | "positive_part" | "sum" | "product", ...}.
rdp::Field build_function(const rdp::Grid& grid, const Node& spec);

/// {"type": "laplacian"} | {"type": "constant", "matrix", "lambda", "Lambda"} |
/// {"type": "oscillating", "amplitude", "frequency", "lambda", "Lambda"}.
rdp::EllipticCoefficients build_coefficients(int dim, const Node& spec);

/// {"type": "zero"} | {"type": "obstacle", "set"} | {"type": "density", "function",
/// "support"?}.
rdp::Measure build_measure(const rdp::Grid& grid, const Node& spec);

rdp::MassScheme build_mass(const Node& parent);

}  // namespace rdplab
