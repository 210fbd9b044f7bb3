#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdp/elliptic.hpp"
#include "rdp/grid.hpp"

namespace rdp {

/// Approximate Green function on a ball: a(v, G) = average of v over B_rho(y).
struct GreenField {
  Field values;
  Point y{};
  double rho = 0.0;  // 0 means a unit nodal load
  Ball domain;
  std::shared_ptr<const SystemMatrix> stiffness;
  std::vector<double> load;  // over the space nodes
  double residual = 0.0;
  std::vector<std::string> warnings;
};

/// Nodal weights b_i = integral over B_rho(y) of phi_i / |B_rho(y)|, from a
/// sub-sampled cell rule normalized so the weights sum to 1. Returned as sorted
/// (node, weight) pairs over the whole grid.
std::vector<std::pair<std::size_t, double>> ball_average_weights(const Grid& grid, const Point& y,
                                                                 double rho);

/// The discrete B_rho(y) average of v that the Green load represents.
double ball_average(const Field& v, const Point& y, double rho);

/// Reuses one stiffness matrix for several singularities on the same ball.
class GreenSolver {
 public:
  GreenSolver(const Grid& grid, const Ball& domain, const EllipticCoefficients& coeffs,
              double rel_tol = 1e-8);

  const SystemMatrix& stiffness() const { return *k_; }
  const Ball& domain() const { return ball_; }

  /// rho < 0 selects the default 2h; rho in (0, h) falls back to a nodal load
  /// with a warning. Throws GeometryError if y is outside the ball.
  GreenField solve(const Point& y, double rho = -1.0) const;

  /// Solve with arbitrary Dirichlet values `outer` on the non-free space nodes.
  GreenField solve_with_boundary(const Point& y, double rho, const Field& outer) const;

 private:
  Ball ball_;
  std::shared_ptr<const SystemMatrix> k_;
  double rel_tol_;
};

GreenField approximate_green(const Grid& grid, const Ball& domain,
                             const EllipticCoefficients& coeffs, const Point& y,
                             double rho = -1.0, double rel_tol = 1e-8);

struct GreenBoundRow {
  double r = 0.0;
  double capacity = 0.0;  // harmonic Cap(B_r(y), domain), Laplacian energy
  double g_min = 0.0;     // on the shell ||x - y| - r| <= h sqrt(N)
  double g_max = 0.0;
  std::size_t shell_nodes = 0;
  double k_lower = 0.0;   // 1 / (Lambda Cap g_min): K needed by the lower bound
  double k_upper = 0.0;   // lambda Cap g_max: K needed by the upper bound
  double k = 0.0;         // max of the two
};

struct GreenBoundReport {
  std::vector<GreenBoundRow> rows;
  double k = 0.0;      // smallest K valid for every row
  double alpha = 0.0;  // smallest alpha for the pointwise power/log bound
  bool consistent = false;  // one finite (K, alpha) covers the family
};

/// Empirical constants of the two-sided capacity bound on spheres around y and
/// of the pointwise bound G <= (alpha / lambda) |x - y|^{2-N} (N = 3) or
/// (alpha / lambda) log(4R / |x - y|) (N = 2). Requires B_{r/q}(y) inside the ball.
GreenBoundReport check_green_bounds(const GreenField& g, const EllipticCoefficients& coeffs,
                                    double q, std::span<const double> radii,
                                    double rel_tol = 1e-8);

}  // namespace rdp
