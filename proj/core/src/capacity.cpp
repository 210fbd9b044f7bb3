#include "rdp/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rdp/error.hpp"

namespace rdp {

namespace {

double relative_residual(const CgResult& cg) {
  return cg.rhs_norm > 0.0 ? cg.residual_norm / cg.rhs_norm : 0.0;
}

void require_subset(const NodeSet& e, const NodeSet& domain) {
  if (!e.is_subset_of(domain)) throw GeometryError("capacity set must lie inside the domain");
}

}  // namespace

CapacitySolver::CapacitySolver(const NodeSet& domain, const EllipticCoefficients& coeffs,
                               CapacityOptions opts)
    : k_(assemble_stiffness(domain, coeffs)), coeffs_(coeffs), opts_(opts) {}

CapacityReport CapacitySolver::harmonic(const NodeSet& e) const {
  require_subset(e, domain());
  const FemSpace& sp = *k_.space;
  CapacityReport rep;
  rep.set = e;
  rep.domain = domain();
  rep.measure = "zero";
  rep.warnings = k_.warnings;

  std::vector<double> x(sp.size(), 0.0);
  std::vector<std::uint8_t> held(sp.size(), 0);
  std::size_t conflicts = 0;
  for (auto i : e) {
    const std::size_t l = sp.local(i);
    if (sp.is_free_local(l)) {
      x[l] = 1.0;
      held[l] = 1;
    } else {
      ++conflicts;
    }
  }
  if (conflicts)
    rep.warnings.push_back(std::to_string(conflicts) + " set nodes on the domain boundary kept at 0");
  if (e.empty()) {
    rep.potential = sp.scatter(x, 0.0);
    return rep;
  }
  const std::vector<double> rhs(sp.size(), 0.0);
  CgOptions cg;
  cg.rel_tol = opts_.rel_tol;
  auto sol = solve_constrained(sp, k_.matrix, rhs, std::move(x), held, cg);
  rep.value = k_.matrix.quadratic_form(sol.x);
  rep.residual = relative_residual(sol.cg);
  rep.iterations = sol.cg.iterations;
  rep.potential = sp.scatter(sol.x, 0.0);
  return rep;
}

CapacityReport CapacitySolver::mu(const NodeSet& e, const Measure& measure) const {
  require_subset(e, domain());
  const FemSpace& sp = *k_.space;
  CapacityReport rep;
  rep.set = e;
  rep.domain = domain();
  rep.measure = describe(measure);
  rep.warnings = k_.warnings;

  const Measure mu_e = restrict(measure, e);
  std::vector<double> x(sp.size(), 1.0);
  if (is_zero(mu_e)) {
    rep.potential = sp.scatter(x, 1.0);
    return rep;
  }
  const std::vector<double> rhs(sp.size(), 0.0);
  CgOptions cg;
  cg.rel_tol = opts_.rel_tol;

  if (const auto* ob = std::get_if<ObstacleMeasure>(&mu_e)) {
    std::vector<std::uint8_t> held(sp.size(), 0);
    std::size_t conflicts = 0;
    for (auto i : ob->set) {
      const std::size_t l = sp.local(i);
      if (sp.is_free_local(l)) {
        x[l] = 0.0;
        held[l] = 1;
      } else {
        ++conflicts;
      }
    }
    if (conflicts)
      rep.warnings.push_back(std::to_string(conflicts) +
                             " obstacle nodes on the domain boundary kept at 1");
    auto sol = solve_constrained(sp, k_.matrix, rhs, std::move(x), held, cg);
    rep.value = k_.matrix.quadratic_form(sol.x);
    rep.residual = relative_residual(sol.cg);
    rep.iterations = sol.cg.iterations;
    rep.potential = sp.scatter(sol.x, 1.0);
    return rep;
  }

  const CsrMatrix m = mass_matrix(sp, mu_e, opts_.mass);
  const CsrMatrix a = k_.matrix + m;
  auto sol = solve_constrained(sp, a, rhs, std::move(x), {}, cg);
  rep.value = k_.matrix.quadratic_form(sol.x) + m.quadratic_form(sol.x);
  rep.residual = relative_residual(sol.cg);
  rep.iterations = sol.cg.iterations;
  rep.potential = sp.scatter(sol.x, 1.0);
  return rep;
}

CapacityReport harmonic_capacity(const NodeSet& e, const NodeSet& domain,
                                 const EllipticCoefficients& coeffs, CapacityOptions opts) {
  return CapacitySolver(domain, coeffs, opts).harmonic(e);
}

CapacityReport mu_capacity(const NodeSet& e, const NodeSet& domain,
                           const EllipticCoefficients& coeffs, const Measure& mu,
                           CapacityOptions opts) {
  return CapacitySolver(domain, coeffs, opts).mu(e, mu);
}

double zero_capacity_threshold(const CapacitySolver& solver, const Point& center) {
  const Grid& g = solver.domain().grid();
  const NodeSet bh = set_intersection(mask(g, Ball{center, g.spacing()}), solver.domain());
  const NodeSet inner = set_intersection(bh, solver.stiffness().space->free());
  return 10.0 * solver.options().rel_tol * solver.harmonic(inner).value;
}

bool LawReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const LawCheck& c) { return c.pass; });
}

LawReport check_prop_1_1(const LawInstance& inst, const EllipticCoefficients& coeffs,
                         CapacityOptions opts) {
  const double slack = 5.0 * opts.rel_tol;
  LawReport rep;
  auto add = [&](std::string name, double lhs, double rhs) {
    const double tol = slack * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    rep.checks.push_back({std::move(name), lhs, rhs, lhs <= rhs + tol});
  };

  const CapacitySolver big(inst.domain, coeffs, opts);
  const double cap_e = big.mu(inst.e, inst.mu).value;
  const double cap_f = big.mu(inst.f, inst.mu).value;
  const double harm_e = big.harmonic(inst.e).value;
  add("a_nonnegative", 0.0, cap_e);
  add("a_below_harmonic", cap_e, harm_e);
  if (inst.nested) add("b_monotone_in_set", cap_e, cap_f);
  const double cap_union = big.mu(set_union(inst.e, inst.f), inst.mu).value;
  const double cap_inter = big.mu(set_intersection(inst.e, inst.f), inst.mu).value;
  add("c_submodular", cap_union + cap_inter, cap_e + cap_f);
  const CapacitySolver small(inst.small_domain, coeffs, opts);
  add("d_antitone_in_domain", cap_e, small.mu(inst.e, inst.mu).value);
  add("e_monotone_in_measure", cap_e, big.mu(inst.e, inst.nu).value);
  return rep;
}

PoincareReport poincare_check(std::span<const Field> fields, const Ball& ball, const Measure& mu,
                              const EllipticCoefficients& coeffs, CapacityOptions opts) {
  if (fields.empty()) throw Error("poincare_check needs at least one field");
  const Grid& g = fields.front().grid;
  const int dim = g.dim();
  const double r = ball.radius;
  if (!g.contains(ball.center, 0.0)) throw GeometryError("ball center outside the grid");
  for (int d = 0; d < dim; ++d) {
    const auto du = std::size_t(d);
    if (ball.center[du] - 2 * r < g.lower()[du] - 1e-12 ||
        ball.center[du] + 2 * r > g.upper()[du] + 1e-12)
      throw GeometryError("B_2r must lie inside the grid box");
  }

  PoincareReport rep;
  const NodeSet outer = mask(g, Ball{ball.center, 2.0 * r});
  const NodeSet inner = mask(g, ball);
  const CapacitySolver solver(outer, coeffs, opts);
  rep.capacity = solver.mu(inner, mu).value;
  rep.threshold = zero_capacity_threshold(solver, ball.center);
  rep.degenerate = rep.capacity < rep.threshold;

  const auto cells = cells_in_ball(g, ball);
  const auto ke = laplacian_element(g);
  const auto node_mass = lumped_node_mass(g, mu);
  const auto* ob = std::get_if<ObstacleMeasure>(&mu);
  const double inf = std::numeric_limits<double>::infinity();
  for (const Field& u : fields) {
    if (!(u.grid == g)) throw GeometryError("test fields must share one grid");
    double l2 = 0.0, grad = 0.0, muterm = 0.0;
    for (auto c : cells) {
      l2 += cell_l2(g, u, c);
      grad += cell_energy(g, ke, u, c);
    }
    for (auto i : inner) {
      if (ob) {
        if (ob->set.contains(i) && u.values[i] != 0.0) muterm = inf;
      } else {
        muterm += node_mass[i] * u.values[i] * u.values[i];
      }
    }
    double ratio = 0.0;
    if (l2 > 0.0) {
      const double den = std::pow(r, dim) / rep.capacity * (grad + muterm);
      ratio = den > 0.0 ? l2 / den : inf;
    }
    rep.ratios.push_back(ratio);
    rep.sup_ratio = std::max(rep.sup_ratio, ratio);
  }
  return rep;
}

}  // namespace rdp
