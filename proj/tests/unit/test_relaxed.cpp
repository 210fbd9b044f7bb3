#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rdp/error.hpp"
#include "rdp/relaxed.hpp"

using namespace rdp;

namespace {

Grid square(double h) {
  const AxisRange box[2] = {{0.0, 1.0}, {0.0, 1.0}};
  return Grid::build(2, box, h);
}

double max_gap(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("linear boundary data is discretely harmonic") {
  const Grid g = square(0.125);
  RelaxedProblem p;
  p.domain = NodeSet::all(g);
  p.g = Field::from_function(g, [](const Point& x) { return x[0]; });
  const Solution s = solve_relaxed(p, 1e-13);
  for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(s.u[i] == doctest::Approx(g.coords(i)[0]).epsilon(1e-11));
}

TEST_CASE("obstacle on a disc equals the classical solve off the disc") {
  const double h = 1.0 / 32;
  const Grid g = square(h);
  const NodeSet all = NodeSet::all(g);
  const NodeSet disc = mask(g, Ball{{0.5, 0.5, 0}, 0.2});

  RelaxedProblem p;
  p.domain = all;
  p.mu = ObstacleMeasure{disc};
  p.nu = SignedDensity{Field(g, 1.0)};
  const Solution s = solve_relaxed(p, 1e-14);

  // Oracle: free block of the Laplacian on interior nodes outside the disc, load h^2.
  const SystemMatrix k = assemble_stiffness(all, EllipticCoefficients::laplacian(2));
  const FemSpace& sp = *k.space;
  std::vector<std::size_t> keep;
  for (std::size_t l = 0; l < sp.size(); ++l)
    if (sp.is_free_local(l) && !disc.contains(sp.nodes()[l])) keep.push_back(l);
  const CsrMatrix a = k.matrix.submatrix(keep);
  const std::vector<double> b(keep.size(), h * h);
  const CgResult r = solve_spd(a, b, CgOptions{1e-14});
  Field classical(g, 0.0);
  for (std::size_t m = 0; m < keep.size(); ++m) classical[sp.nodes()[keep[m]]] = r.x[m];

  CHECK(max_gap(s.u, classical) <= 1e-12);
  for (auto i : disc) CHECK(s.u[i] == 0.0);
}

TEST_CASE("large densities approach the obstacle solution monotonically") {
  const Grid g = square(1.0 / 24);
  const NodeSet all = NodeSet::all(g);
  const NodeSet disc = mask(g, Ball{{0.5, 0.5, 0}, 0.2});
  RelaxedProblem p;
  p.domain = all;
  p.nu = SignedDensity{Field(g, 1.0)};
  p.mu = ObstacleMeasure{disc};
  const Field limit = solve_relaxed(p, 1e-12).u;
  double last = INFINITY;
  for (double c : {1e2, 1e4, 1e6}) {
    DensityMeasure d{Field(g, c), disc};
    p.mu = d;
    const double gap = max_gap(solve_relaxed(p, 1e-12).u, limit);
    CHECK(gap < last);
    last = gap;
  }
  CHECK(last < 1e-4);
}

TEST_CASE("the solution minimizes the functional") {
  const Grid g = square(1.0 / 16);
  RelaxedProblem p;
  p.domain = mask(g, Ball{{0.5, 0.5, 0}, 0.45});
  p.mu = make_density(Field::from_function(g, [](const Point& x) { return 20 * x[0]; }));
  p.nu = SignedDensity{Field::from_function(g, [](const Point& x) { return std::sin(5 * x[1]); })};
  p.g = Field(g, 0.5);
  const Solution s = solve_relaxed(p, 1e-12);
  const MinimalityReport m = minimize_functional_check(s, 20, 4);
  CHECK(m.pass);
  CHECK(m.min_gap >= -1e-10);
  CHECK(m.max_quadratic_dev < 1e-8);
  CHECK(functional_value(s, s.u) == doctest::Approx(s.functional).epsilon(1e-12));
}

TEST_CASE("nonzero data on a boundary obstacle node is refused") {
  const Grid g = square(0.125);
  RelaxedProblem p;
  p.domain = NodeSet::all(g);
  p.mu = ObstacleMeasure{mask(g, HalfSpace{{1, 0, 0}, 0.2})};
  p.g = Field(g, 1.0);
  CHECK_THROWS_AS(solve_relaxed(p), MeasureError);
}

TEST_CASE("local oscillation") {
  const Grid g = square(0.25);
  CHECK(local_oscillation(Field(g, 2.0), {0.5, 0.5, 0}, 0.3).osc == 0.0);
  const Field x = Field::from_function(g, [](const Point& p) { return p[0]; });
  // Nodes within 0.25 of the center: (0.5, 0.5) and its four axis neighbors.
  const Oscillation o = local_oscillation(x, {0.5, 0.5, 0}, 0.25);
  CHECK(o.nodes == 5);
  CHECK(o.osc == doctest::Approx(0.5));
  const Field w = Field::from_function(square(1.0 / 16), [](const Point& p) { return std::sin(9 * p[0] * p[1]); });
  double prev = -1.0;
  for (double rho : {0.05, 0.1, 0.2, 0.4}) {
    const double v = local_oscillation(w, {0.4, 0.6, 0}, rho).osc;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(local_oscillation(x, {0.1, 0.1, 0}, 0.01), GeometryError);
}

TEST_CASE("complement obstacle") {
  const Grid g = square(0.125);
  const NodeSet outer = NodeSet::all(g), inner = mask(g, Ball{{0.5, 0.5, 0}, 0.3});
  const NodeSet ob = complement_obstacle(outer, inner);
  CHECK(ob == set_difference(outer, interior_nodes(inner)));
  CHECK(set_intersection(ob, interior_nodes(inner)).empty());
}
