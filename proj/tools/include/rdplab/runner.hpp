#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rdplab/config.hpp"

namespace rdplab {

enum class Status { pass, degenerate, inconclusive, fail, config_error };

const char* to_string(Status s);
int exit_code(Status s);
/// Severity order used to merge a suite: pass = degenerate < inconclusive < fail < config_error.
int severity(Status s);

struct Metric {
  std::string name;
  std::string value;  // numbers formatted with %.17g
};

struct RunReport {
  std::string scenario;
  std::string task;
  Status status = Status::pass;
  std::string message;
  std::vector<std::string> files;  // relative to the scenario output directory
  std::vector<Metric> metrics;
  std::vector<std::string> warnings;
  double wall_time = 0.0;  // seconds; never written to CSV

  void metric(const std::string& name, double v);
  void metric(const std::string& name, const std::string& v);
  /// Value of a metric, or nullopt. Numbers only.
  std::optional<double> number(const std::string& name) const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out;  // --out
  bool plots = false;
  std::optional<double> rel_tol;             // --tol
  double refine = 1.0;                       // --refine
  bool quiet = false;
};

/// Output directory: --out, then $RDP_OUT_DIR, then the config's "output", then "rdp_out".
std::filesystem::path output_root(const ScenarioConfig& c, const RunOptions& opts);

/// Runs one scenario and writes its files under <root>/<name>/. Config errors found
/// while reading task keys come back as Status::config_error.
RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opts);

struct SuiteReport {
  std::vector<RunReport> runs;  // sorted by scenario name
  Status status = Status::pass;
  std::filesystem::path summary;
};

/// Every *.json file in `dir`, run on `jobs` threads. Writes suite_summary.csv under
/// the output root (the --out / environment / default chain).
SuiteReport run_suite(const std::filesystem::path& dir, int jobs, const RunOptions& opts);

/// The long-format summary: scenario,task,status,metric,value.
std::string summary_csv(const std::vector<RunReport>& runs);

}  // namespace rdplab
