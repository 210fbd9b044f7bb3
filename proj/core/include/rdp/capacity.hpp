#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rdp/elliptic.hpp"
#include "rdp/grid.hpp"
#include "rdp/measures.hpp"
#include "rdp/sparse.hpp"

namespace rdp {

struct CapacityReport {
  double value = 0.0;
  Field potential;
  NodeSet set;
  NodeSet domain;
  double residual = 0.0;  // relative CG residual
  std::size_t iterations = 0;
  std::string measure = "zero";
  std::vector<std::string> warnings;
};

struct CapacityOptions {
  double rel_tol = 1e-8;
  MassScheme mass = MassScheme::lumped;
};

/// Capacities relative to one domain. The stiffness matrix is assembled once.
class CapacitySolver {
 public:
  CapacitySolver(const NodeSet& domain, const EllipticCoefficients& coeffs,
                 CapacityOptions opts = {});

  const SystemMatrix& stiffness() const { return k_; }
  const NodeSet& domain() const { return k_.space->domain(); }
  const CapacityOptions& options() const { return opts_; }

  /// inf a(u, u) over u = 1 on E, u = 0 off interior(domain). E nodes on the
  /// domain boundary stay 0 and produce a warning.
  CapacityReport harmonic(const NodeSet& e) const;

  /// min a(u, u) + integral u^2 d(mu restricted to E) over u - 1 vanishing off
  /// interior(domain). Obstacle measures pin u = 0 on their set intersected with E.
  CapacityReport mu(const NodeSet& e, const Measure& mu) const;

 private:
  SystemMatrix k_;
  EllipticCoefficients coeffs_;
  CapacityOptions opts_;
};

CapacityReport harmonic_capacity(const NodeSet& e, const NodeSet& domain,
                                 const EllipticCoefficients& coeffs, CapacityOptions opts = {});
CapacityReport mu_capacity(const NodeSet& e, const NodeSet& domain,
                           const EllipticCoefficients& coeffs, const Measure& mu,
                           CapacityOptions opts = {});

/// Below this value a discrete set counts as having zero capacity:
/// 10 * rel_tol * Cap(B_h(center), domain).
double zero_capacity_threshold(const CapacitySolver& solver, const Point& center);

struct LawCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

/// One instance of the set and measure laws of the mu-capacity:
/// (a) 0 <= Cap_mu(E) <= Cap(E); (b) E subset F gives Cap_mu(E) <= Cap_mu(F);
/// (c) submodularity in the set; (d) Cap_mu(E, big) <= Cap_mu(E, small);
/// (e) mu <= nu gives Cap_mu <= Cap_nu.
struct LawInstance {
  NodeSet e;
  NodeSet f;
  NodeSet domain;        // the larger domain
  NodeSet small_domain;  // contained in `domain`, contains E and F
  Measure mu;
  Measure nu;  // nu >= mu
  /// True when E is a subset of F, enabling law (b).
  bool nested = false;
};

struct LawReport {
  std::vector<LawCheck> checks;
  bool pass() const;
};

LawReport check_prop_1_1(const LawInstance& inst, const EllipticCoefficients& coeffs,
                         CapacityOptions opts = {});

struct PoincareReport {
  std::vector<double> ratios;  // one per test field
  double sup_ratio = 0.0;
  double capacity = 0.0;  // Cap_mu(B_r, B_2r)
  double threshold = 0.0;
  bool degenerate = false;
};

/// Ratio of integral_{B_r} u^2 to (r^N / Cap_mu(B_r, B_2r)) (integral_{B_r} |Du|^2 +
/// integral_{B_r} u^2 dmu) for each field; 0/0 counts as 0. With an obstacle
/// measure the mu term is infinite when u is nonzero on the obstacle.
PoincareReport poincare_check(std::span<const Field> fields, const Ball& ball, const Measure& mu,
                              const EllipticCoefficients& coeffs, CapacityOptions opts = {});

}  // namespace rdp
