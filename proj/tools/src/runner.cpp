#include "rdplab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <thread>

#include "rdp/error.hpp"
#include "rdplab/output.hpp"
#include "tasks.hpp"

namespace rdplab {

const char* to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::degenerate:
      return "degenerate";
    case Status::inconclusive:
      return "inconclusive";
    case Status::fail:
      return "fail";
    case Status::config_error:
      return "config_error";
  }
  return "fail";
}

int exit_code(Status s) {
  switch (s) {
    case Status::pass:
    case Status::degenerate:
      return 0;
    case Status::fail:
      return 1;
    case Status::inconclusive:
      return 2;
    case Status::config_error:
      return 3;
  }
  return 1;
}

int severity(Status s) {
  switch (s) {
    case Status::pass:
    case Status::degenerate:
      return 0;
    case Status::inconclusive:
      return 1;
    case Status::fail:
      return 2;
    case Status::config_error:
      return 3;
  }
  return 2;
}

void RunReport::metric(const std::string& name, double v) { metrics.push_back({name, fmt(v)}); }
void RunReport::metric(const std::string& name, const std::string& v) { metrics.push_back({name, v}); }

std::optional<double> RunReport::number(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name != name) continue;
    char* end = nullptr;
    const double v = std::strtod(m.value.c_str(), &end);
    if (end && *end == '\0') return v;
    return std::nullopt;
  }
  return std::nullopt;
}

std::filesystem::path output_root(const ScenarioConfig& c, const RunOptions& opts) {
  if (opts.out) return *opts.out;
  if (const char* env = std::getenv("RDP_OUT_DIR"); env && *env) return env;
  if (!c.output.empty()) return c.output;
  return "rdp_out";
}

RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opts) {
  RunReport rep;
  rep.scenario = c.name;
  rep.task = c.task;
  const auto start = std::chrono::steady_clock::now();
  detail::TaskContext t{c, opts, output_root(c, opts) / c.name, rep};
  try {
    std::filesystem::create_directories(t.dir);
    if (c.task == "capacity_sweep") {
      detail::capacity_sweep(t);
    } else if (c.task == "green_check") {
      detail::green_check(t);
    } else if (c.task == "wiener_classify") {
      detail::wiener_classify(t);
    } else if (c.task == "relaxed_solve") {
      detail::relaxed_solve(t);
    } else if (c.task == "energy_verify") {
      detail::energy_verify(t);
    } else if (c.task == "lemma_3_4") {
      detail::lemma_3_4(t);
    } else {
      throw ConfigError("task", "unknown task '" + c.task + "'");
    }
  } catch (const ConfigError& e) {
    rep.status = Status::config_error;
    rep.message = e.what();
  } catch (const rdp::GeometryError& e) {
    rep.status = Status::config_error;
    rep.message = std::string("geometry: ") + e.what();
  } catch (const rdp::CoefficientError& e) {
    rep.status = Status::config_error;
    rep.message = std::string("coefficients: ") + e.what();
  } catch (const rdp::MeasureError& e) {
    rep.status = Status::config_error;
    rep.message = std::string("measure: ") + e.what();
  } catch (const rdp::SolverError& e) {
    rep.status = Status::fail;
    rep.message = std::string("solver: ") + e.what();
  } catch (const std::exception& e) {
    rep.status = Status::fail;
    rep.message = e.what();
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string summary_csv(const std::vector<RunReport>& runs) {
  Csv csv({"scenario", "task", "status", "metric", "value"});
  for (const auto& r : runs) {
    csv.row({r.scenario, r.task, to_string(r.status), "status", to_string(r.status)});
    for (const auto& m : r.metrics) csv.row({r.scenario, r.task, to_string(r.status), m.name, m.value});
  }
  return csv.text();
}

SuiteReport run_suite(const std::filesystem::path& dir, int jobs, const RunOptions& opts) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  SuiteReport suite;
  if (files.empty()) {
    RunReport r;
    r.scenario = dir.filename().string();
    r.task = "suite";
    r.status = Status::config_error;
    r.message = "no *.json scenario files in " + dir.string();
    suite.runs.push_back(r);
    suite.status = Status::config_error;
    return suite;
  }

  // Parse serially so duplicate names are caught before anything runs.
  std::vector<std::optional<ScenarioConfig>> configs(files.size());
  std::vector<RunReport> reports(files.size());
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      configs[i] = load_config(files[i]);
      if (!seen.emplace(configs[i]->name, i).second)
        throw ConfigError("name", "duplicate scenario name '" + configs[i]->name + "'");
    } catch (const ConfigError& e) {
      reports[i].scenario = configs[i] ? configs[i]->name + "#" + files[i].stem().string() : files[i].stem().string();
      reports[i].task = configs[i] ? configs[i]->task : "unknown";
      reports[i].status = Status::config_error;
      reports[i].message = e.what();
      configs[i].reset();
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++)
      if (configs[i]) reports[i] = run_scenario(*configs[i], opts);
  };
  const int n = std::max(1, std::min<int>(jobs, int(files.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::stable_sort(reports.begin(), reports.end(),
                   [](const RunReport& a, const RunReport& b) { return a.scenario < b.scenario; });
  for (const auto& r : reports)
    if (severity(r.status) > severity(suite.status)) suite.status = r.status;
  suite.runs = std::move(reports);

  std::filesystem::path root;
  if (opts.out) {
    root = *opts.out;
  } else if (const char* env = std::getenv("RDP_OUT_DIR"); env && *env) {
    root = env;
  } else {
    root = "rdp_out";
  }
  suite.summary = root / "suite_summary.csv";
  write_text(suite.summary, summary_csv(suite.runs));
  return suite;
}

}  // namespace rdplab
