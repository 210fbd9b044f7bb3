#include "rdp/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rdp/capacity.hpp"
#include "rdp/error.hpp"

namespace rdp {

namespace {

constexpr int kSubSamples = 8;

}  // namespace

std::vector<std::pair<std::size_t, double>> ball_average_weights(const Grid& g, const Point& y,
                                                                 double rho) {
  const int dim = g.dim();
  const double h = g.spacing();
  const double hs = h / kSubSamples;
  std::map<std::size_t, double> acc;
  double total = 0.0;

  // Cell index range covering the bounding box of the ball.
  MultiIndex lo{0, 0, 0}, hi{0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    const auto du = std::size_t(d);
    const double a = std::floor((y[du] - rho - g.lower()[du]) / h);
    const double b = std::floor((y[du] + rho - g.lower()[du]) / h);
    const double cmax = double(g.cells_along(d)) - 1.0;
    lo[du] = std::size_t(std::clamp(a, 0.0, cmax));
    hi[du] = std::size_t(std::clamp(b, 0.0, cmax));
  }
  const int nsub = dim == 3 ? kSubSamples * kSubSamples * kSubSamples : kSubSamples * kSubSamples;
  const double w = std::pow(hs, dim);
  for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        const std::size_t cell = g.cell_index({i, j, k});
        const Point o = g.coords(g.cell_origin(cell));
        const auto corners = g.cell_corners(cell);
        double local[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        double inside = 0.0;
        for (int s = 0; s < nsub; ++s) {
          const int sx = s % kSubSamples;
          const int sy = (s / kSubSamples) % kSubSamples;
          const int sz = s / (kSubSamples * kSubSamples);
          const double t[3] = {(sx + 0.5) / kSubSamples, (sy + 0.5) / kSubSamples,
                               (sz + 0.5) / kSubSamples};
          double r2 = 0.0;
          for (int d = 0; d < dim; ++d) {
            const double p = o[std::size_t(d)] + t[d] * h - y[std::size_t(d)];
            r2 += p * p;
          }
          if (r2 > rho * rho) continue;
          inside += w;
          for (int a = 0; a < g.corners_per_cell(); ++a) {
            double phi = 1.0;
            for (int d = 0; d < dim; ++d) phi *= ((a >> d) & 1) ? t[d] : 1.0 - t[d];
            local[a] += w * phi;
          }
        }
        if (inside == 0.0) continue;
        total += inside;
        for (int a = 0; a < g.corners_per_cell(); ++a) acc[corners[std::size_t(a)]] += local[a];
      }
    }
  }
  std::vector<std::pair<std::size_t, double>> out;
  if (total == 0.0) return out;
  for (const auto& [node, v] : acc) out.emplace_back(node, v / total);
  return out;
}

double ball_average(const Field& v, const Point& y, double rho) {
  double s = 0.0;
  for (const auto& [i, w] : ball_average_weights(v.grid, y, rho)) s += w * v.values[i];
  return s;
}

GreenSolver::GreenSolver(const Grid& grid, const Ball& domain, const EllipticCoefficients& coeffs,
                         double rel_tol)
    : ball_(domain),
      k_(std::make_shared<SystemMatrix>(assemble_stiffness(mask(grid, domain), coeffs))),
      rel_tol_(rel_tol) {}

GreenField GreenSolver::solve(const Point& y, double rho) const {
  return solve_with_boundary(y, rho, Field(k_->space->grid(), 0.0));
}

GreenField GreenSolver::solve_with_boundary(const Point& y, double rho, const Field& outer) const {
  const FemSpace& sp = *k_->space;
  const Grid& g = sp.grid();
  GreenField out;
  out.y = y;
  out.domain = ball_;
  out.stiffness = k_;
  out.warnings = k_->warnings;
  if (distance(y, ball_.center) > ball_.radius) throw GeometryError("Green singularity outside the ball");
  if (rho < 0.0) rho = 2.0 * g.spacing();
  if (rho > 0.0 && rho < g.spacing()) {
    out.warnings.push_back("averaging radius below h; using a nodal load");
    rho = 0.0;
  }
  out.rho = rho;

  std::vector<std::pair<std::size_t, double>> weights;
  if (rho > 0.0) weights = ball_average_weights(g, y, rho);
  if (weights.empty()) weights = {{g.nearest_node(y), 1.0}};
  out.load.assign(sp.size(), 0.0);
  for (const auto& [i, w] : weights) {
    const std::size_t l = sp.local(i);
    if (l == FemSpace::npos || !sp.is_free_local(l))
      throw GeometryError("Green load reaches the boundary of the ball");
    out.load[l] = w;
  }

  std::vector<double> x = sp.gather(outer);
  for (std::size_t l = 0; l < sp.size(); ++l)
    if (sp.is_free_local(l)) x[l] = 0.0;
  CgOptions cg;
  cg.rel_tol = rel_tol_;
  auto sol = solve_constrained(sp, k_->matrix, out.load, std::move(x), {}, cg);
  out.residual = sol.cg.rhs_norm > 0.0 ? sol.cg.residual_norm / sol.cg.rhs_norm : 0.0;
  out.values = sp.scatter(sol.x, 0.0);
  return out;
}

GreenField approximate_green(const Grid& grid, const Ball& domain,
                             const EllipticCoefficients& coeffs, const Point& y, double rho,
                             double rel_tol) {
  return GreenSolver(grid, domain, coeffs, rel_tol).solve(y, rho);
}

GreenBoundReport check_green_bounds(const GreenField& gf, const EllipticCoefficients& coeffs,
                                    double q, std::span<const double> radii, double rel_tol) {
  const Grid& g = gf.values.grid;
  const int dim = g.dim();
  const double h = g.spacing();
  const double shell = h * std::sqrt(double(dim));
  const double lam = coeffs.lower(), Lam = coeffs.upper();
  if (!(q > 0.0 && q < 1.0)) throw GeometryError("q must lie in (0, 1)");

  GreenBoundReport rep;
  const NodeSet domain = gf.stiffness->space->domain();
  // The bound is stated with the harmonic capacity of |Du|^2, not the energy of L;
  // that keeps K invariant when the coefficients are scaled.
  const CapacitySolver cap(domain, EllipticCoefficients::laplacian(dim),
                           CapacityOptions{rel_tol, MassScheme::lumped});
  const double inf = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    if (distance(gf.y, gf.domain.center) + r / q > gf.domain.radius * (1.0 + 1e-12))
      throw GeometryError("B_{r/q}(y) must lie inside the Green ball");
    GreenBoundRow row;
    row.r = r;
    row.g_min = inf;
    // Nodes near the sphere are pushed radially onto it and G is interpolated
    // there; reading node values directly smears r by up to h*sqrt(N).
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const Point x = g.coords(i);
      const double d = distance(x, gf.y);
      if (std::abs(d - r) > shell || d <= 0.0) continue;
      Point p = gf.y;
      for (int a = 0; a < dim; ++a) p[a] += (x[a] - gf.y[a]) * r / d;
      const double v = interpolate(gf.values, p);
      ++row.shell_nodes;
      row.g_min = std::min(row.g_min, v);
      row.g_max = std::max(row.g_max, v);
    }
    if (row.shell_nodes == 0) throw GeometryError("no nodes near the sphere; radius below h");
    const NodeSet e = set_intersection(mask(g, Ball{gf.y, r}), domain);
    row.capacity = cap.harmonic(e).value;
    row.k_lower = row.g_min > 0.0 ? 1.0 / (Lam * row.capacity * row.g_min) : inf;
    row.k_upper = lam * row.capacity * row.g_max;
    row.k = std::max(row.k_lower, row.k_upper);
    rep.k = std::max(rep.k, row.k);
    rep.rows.push_back(row);
  }

  const double big_r = gf.domain.radius;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double d = distance(g.coords(i), gf.y);
    if (d <= 0.0 || gf.values[i] <= 0.0) continue;
    const double kernel = dim == 3 ? 1.0 / d : std::log(4.0 * big_r / d);
    rep.alpha = std::max(rep.alpha, lam * gf.values[i] / kernel);
  }
  rep.consistent = std::isfinite(rep.k) && rep.k > 0.0 && std::isfinite(rep.alpha);
  return rep;
}

}  // namespace rdp
