#include "rdp/relaxed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rdp/error.hpp"

namespace rdp {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return double(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

Solution solve_relaxed(const RelaxedProblem& p, double rel_tol, const Field* initial) {
  const Grid& grid = p.domain.grid();
  Solution s;
  auto k = std::make_shared<SystemMatrix>(assemble_stiffness(p.domain, p.coeffs));
  const FemSpace& sp = *k->space;
  s.warnings = k->warnings;

  const Field g = p.g.values.empty() ? Field(grid, 0.0) : p.g;
  if (!(g.grid == grid)) throw GeometryError("boundary datum grid does not match");
  s.load = p.nu.density.values.empty() ? std::vector<double>(sp.size(), 0.0)
                                       : load_vector(sp, p.nu);

  std::vector<double> x = sp.gather(g);
  s.pinned.assign(sp.size(), 0);
  const CsrMatrix* a = &k->matrix;
  CsrMatrix sum;
  if (const auto* ob = std::get_if<ObstacleMeasure>(&p.mu)) {
    for (auto i : ob->set) {
      const std::size_t l = sp.local(i);
      if (l == FemSpace::npos) continue;
      if (sp.is_free_local(l)) {
        x[l] = 0.0;
        s.pinned[l] = 1;
      } else if (g.values[i] != 0.0) {
        throw MeasureError("boundary datum must vanish where the obstacle meets the boundary");
      }
    }
    s.mass = CsrMatrix::from_triplets(sp.size(), sp.size(), {});
  } else {
    s.mass = mass_matrix(sp, p.mu, p.mass);
    if (s.mass.nonzeros() > 0) {
      sum = k->matrix + s.mass;
      a = &sum;
    }
  }

  std::vector<double> x0;
  if (initial) x0 = sp.gather(*initial);
  CgOptions cg;
  cg.rel_tol = rel_tol;
  auto sol = solve_constrained(sp, *a, s.load, std::move(x), s.pinned, cg, x0);
  s.residual = sol.cg.rhs_norm > 0.0 ? sol.cg.residual_norm / sol.cg.rhs_norm : 0.0;
  s.iterations = sol.cg.iterations;

  s.u = g;
  for (std::size_t l = 0; l < sp.size(); ++l) s.u.values[sp.nodes()[l]] = sol.x[l];
  s.energy = k->matrix.quadratic_form(sol.x);
  s.mu_term = s.mass.nonzeros() ? s.mass.quadratic_form(sol.x) : 0.0;
  s.functional = s.energy + s.mu_term - 2.0 * dot(s.load, sol.x);
  s.stiffness = std::move(k);
  return s;
}

double functional_value(const Solution& s, const Field& v) {
  const FemSpace& sp = *s.stiffness->space;
  const auto x = sp.gather(v);
  for (std::size_t l = 0; l < x.size(); ++l)
    if (s.pinned[l] && x[l] != 0.0) return std::numeric_limits<double>::infinity();
  const double mu = s.mass.nonzeros() ? s.mass.quadratic_form(x) : 0.0;
  return s.stiffness->matrix.quadratic_form(x) + mu - 2.0 * dot(s.load, x);
}

MinimalityReport minimize_functional_check(const Solution& s, std::size_t count,
                                           std::uint64_t seed, double slack) {
  const FemSpace& sp = *s.stiffness->space;
  std::mt19937_64 rng(seed);
  MinimalityReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  const double f0 = functional_value(s, s.u);
  const double ts[] = {0.1, -0.1, 0.01, -0.01};
  for (std::size_t trial = 0; trial < count; ++trial) {
    Field w(s.u.grid, 0.0);
    for (std::size_t l = 0; l < sp.size(); ++l)
      if (sp.is_free_local(l) && !s.pinned[l]) w.values[sp.nodes()[l]] = 2.0 * unit_uniform(rng) - 1.0;
    const auto wx = sp.gather(w);
    const double q = s.stiffness->matrix.quadratic_form(wx) +
                     (s.mass.nonzeros() ? s.mass.quadratic_form(wx) : 0.0);
    for (double t : ts) {
      Field v = s.u;
      for (std::size_t i = 0; i < v.size(); ++i) v.values[i] += t * w.values[i];
      const double gap = functional_value(s, v) - f0;
      rep.min_gap = std::min(rep.min_gap, gap);
      rep.max_quadratic_dev = std::max(rep.max_quadratic_dev, std::abs(gap - t * t * q));
      if (gap < -slack) rep.pass = false;
      ++rep.trials;
    }
  }
  return rep;
}

Oscillation local_oscillation(const Field& u, const Point& x0, double rho) {
  const NodeSet nodes = mask(u.grid, Ball{x0, rho});
  if (nodes.empty()) throw GeometryError("oscillation ball holds no node");
  Oscillation o;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto i : nodes) {
    const double v = u.values[i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    o.mean += v;
    o.mean_abs += std::abs(v);
  }
  o.nodes = nodes.size();
  o.osc = hi - lo;
  o.mean /= double(o.nodes);
  o.mean_abs /= double(o.nodes);
  return o;
}

double point_value(const Field& u, const Point& x0) {
  return local_oscillation(u, x0, 2.0 * u.grid.spacing()).mean;
}

NodeSet complement_obstacle(const NodeSet& outer, const NodeSet& inner) {
  return set_difference(outer, interior_nodes(inner));
}

RelaxedProblem local_problem(const RelaxedProblem& parent, const Solution& parent_solution,
                             const Ball& ball) {
  RelaxedProblem p = parent;
  p.domain = set_intersection(mask(parent.domain.grid(), ball), parent.domain);
  p.g = parent_solution.u;
  return p;
}

}  // namespace rdp
