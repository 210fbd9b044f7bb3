#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rdp/elliptic.hpp"
#include "rdp/grid.hpp"
#include "rdp/measures.hpp"

namespace rdp {

/// L u + mu u = nu in the domain, u = g on its boundary nodes.
struct RelaxedProblem {
  NodeSet domain;
  EllipticCoefficients coeffs = EllipticCoefficients::laplacian(2);
  Measure mu = ZeroMeasure{};
  SignedDensity nu;  // an empty field means nu = 0
  Field g;           // empty means g = 0
  MassScheme mass = MassScheme::lumped;
};

struct Solution {
  Field u;
  double residual = 0.0;  // relative CG residual
  std::size_t iterations = 0;
  double energy = 0.0;      // a(u, u)
  double mu_term = 0.0;     // integral u^2 dmu
  double functional = 0.0;  // a(u, u) + integral u^2 dmu - 2 <nu, u>
  std::vector<std::string> warnings;

  std::shared_ptr<const SystemMatrix> stiffness;
  CsrMatrix mass;            // over the space nodes; empty for obstacles
  std::vector<double> load;  // over the space nodes
  std::vector<std::uint8_t> pinned;  // space nodes held at 0 by an obstacle
};

/// Weak solution of the relaxed problem. Obstacle measures pin u = 0 on their set;
/// this needs g = 0 on the obstacle nodes that lie on the domain boundary, else a
/// MeasureError is thrown. `initial` (optional) seeds the iteration.
Solution solve_relaxed(const RelaxedProblem& p, double rel_tol = 1e-8,
                       const Field* initial = nullptr);

/// F(v) = a(v, v) + integral v^2 dmu - 2 <nu, v> for a field v on the problem's space.
/// Infinite when v is nonzero on an obstacle node.
double functional_value(const Solution& s, const Field& v);

struct MinimalityReport {
  std::size_t trials = 0;
  double min_gap = 0.0;            // min over trials of F(u + t w) - F(u)
  double max_quadratic_dev = 0.0;  // max |F(u+tw) - F(u) - t^2 (a(w,w) + mu(w,w))|
  bool pass = true;
};

/// Compares F(u) with F(u + t w) for random admissible w (zero on the boundary and
/// on obstacle nodes), t in {+-0.1, +-0.01}. Deterministic for a given seed.
MinimalityReport minimize_functional_check(const Solution& s, std::size_t count = 20,
                                           std::uint64_t seed = 12345, double slack = 1e-10);

struct Oscillation {
  double osc = 0.0;       // max - min over nodes in B_rho(x0)
  double mean = 0.0;      // mean nodal value over the ball
  double mean_abs = 0.0;  // mean of |u| over the ball
  std::size_t nodes = 0;
};

/// Throws GeometryError when the ball holds no node.
Oscillation local_oscillation(const Field& u, const Point& x0, double rho);

/// Pointwise value at x0 under the ball-average convention: mean over B_{2h}(x0).
double point_value(const Field& u, const Point& x0);

/// Nodes of `outer` that are not interior nodes of `inner`: the obstacle set whose
/// relaxed problem on `outer` reproduces the Dirichlet problem on `inner`.
NodeSet complement_obstacle(const NodeSet& outer, const NodeSet& inner);

/// Problem on a sub-ball taking its boundary values from a parent solution.
RelaxedProblem local_problem(const RelaxedProblem& parent, const Solution& parent_solution,
                             const Ball& ball);

}  // namespace rdp
