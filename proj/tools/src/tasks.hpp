#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "rdp/grid.hpp"
#include "rdplab/output.hpp"
#include "rdplab/runner.hpp"

namespace rdplab::detail {

struct TaskContext {
  const ScenarioConfig& c;
  const RunOptions& opts;
  std::filesystem::path dir;
  RunReport& rep;

  double rel_tol() const { return opts.rel_tol.value_or(c.rel_tol); }
  Node root() const { return Node(c.doc, ""); }
  /// Grid for refinement factor f (also scaled by --refine).
  rdp::Grid grid(double f) const;
  void csv(const std::string& file, const Csv& table) const;
  void svg(const std::string& file, const std::string& text) const;
};

bool box_holds(const rdp::Grid& g, const rdp::Point& x0, double radius);
void require_box(const rdp::Grid& g, const rdp::Point& x0, double radius, const std::string& key,
                 const std::string& what);
double unit_uniform(std::mt19937_64& rng);

void capacity_sweep(TaskContext& t);
void green_check(TaskContext& t);
void wiener_classify(TaskContext& t);
void relaxed_solve(TaskContext& t);
void energy_verify(TaskContext& t);
void lemma_3_4(TaskContext& t);

}  // namespace rdplab::detail
