// rdplab: scenario runner for the relaxed Dirichlet toolkit.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "rdplab/runner.hpp"

namespace {

void print(const rdplab::RunReport& r) {
  std::printf("%-28s %-16s %-12s %7.2fs  %s\n", r.scenario.c_str(), r.task.c_str(), rdplab::to_string(r.status),
              r.wall_time, r.message.c_str());
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed Dirichlet problem scenario runner"};
  app.require_subcommand(1);

  rdplab::RunOptions opts;
  std::string out;
  double tol = 0.0;
  app.add_option("--out", out, "Output directory (overrides RDP_OUT_DIR and the config)");
  app.add_flag("--plots", opts.plots, "Write SVG plots next to the CSV files");
  app.add_option("--tol", tol, "Solver relative tolerance, overrides the config")->check(CLI::Range(1e-16, 1e-2));
  app.add_option("--refine", opts.refine, "Divide every grid spacing by this factor")->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config, "Scenario file (JSON)")->required();

  std::string dir;
  int jobs = 1;
  auto* suite = app.add_subcommand("suite", "Run every scenario in a directory");
  suite->add_option("dir", dir, "Directory of scenario files")->required();
  suite->add_option("--jobs", jobs, "Parallel scenario runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  if (!out.empty()) opts.out = out;
  if (tol > 0.0) opts.rel_tol = tol;

  if (*run) {
    rdplab::ScenarioConfig c;
    try {
      c = rdplab::load_config(config);
    } catch (const rdplab::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 3;
    }
    const rdplab::RunReport r = rdplab::run_scenario(c, opts);
    print(r);
    if (r.status == rdplab::Status::config_error) std::fprintf(stderr, "config error: %s\n", r.message.c_str());
    return rdplab::exit_code(r.status);
  }

  const rdplab::SuiteReport s = rdplab::run_suite(dir, jobs, opts);
  for (const auto& r : s.runs) print(r);
  std::printf("suite: %s, summary in %s\n", rdplab::to_string(s.status), s.summary.string().c_str());
  return rdplab::exit_code(s.status);
}
