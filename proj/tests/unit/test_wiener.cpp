#include <doctest.h>

#include <cmath>

#include "rdp/error.hpp"
#include "rdp/wiener.hpp"

using namespace rdp;

namespace {

Grid centered(int dim, double half, double h) {
  const AxisRange box[3] = {{-half, half}, {-half, half}, {-half, half}};
  return Grid::build(dim, std::span<const AxisRange>(box, std::size_t(dim)), h);
}

const Point o{0, 0, 0};

WienerOptions opts(double cells = 2.0) {
  WienerOptions w;
  w.min_rho_cells = cells;
  w.rel_tol = 1e-10;
  return w;
}

}  // namespace

TEST_CASE("closed-form moduli") {
  SUBCASE("delta = 1") {
    const WienerProfile p = profile_from_delta(o, 1.0, 0.5, std::vector<double>(6, 1.0));
    for (double r : {0.5, 0.2, 0.05, 1.0 / 32}) CHECK(wiener_modulus(p, r, 1.0) == doctest::Approx(r));
    CHECK(wiener_modulus(p, 0.125, 0.5) == doctest::Approx(0.25));
  }
  SUBCASE("delta = 0") {
    const WienerProfile p = profile_from_delta(o, 1.0, 0.5, std::vector<double>(6, 0.0));
    CHECK(wiener_modulus(p, 1.0 / 32, 1.0) == 1.0);
  }
  SUBCASE("delta = 1/2") {
    const WienerProfile p = profile_from_delta(o, 1.0, 0.5, std::vector<double>(5, 0.5));
    CHECK(wiener_modulus(p, 0.125, 1.0) == doctest::Approx(0.35355).epsilon(1e-5));
  }
  SUBCASE("outside the sampled range") {
    const WienerProfile p = profile_from_delta(o, 1.0, 0.5, std::vector<double>(3, 0.5));
    CHECK_THROWS_AS(wiener_integral(p, 0.1, 1.0), GeometryError);
    CHECK_THROWS_AS(wiener_integral(p, 0.5, 0.25), GeometryError);
  }
}

TEST_CASE("zero measure") {
  const Grid g = centered(2, 1.0, 1.0 / 32);
  const WienerProfile p = delta_profile(g, o, 0.5, 4, ZeroMeasure{}, EllipticCoefficients::laplacian(2), opts());
  for (double d : p.delta) CHECK(d == 0.0);
  for (double w : p.omega) CHECK(w == 1.0);
}

TEST_CASE("full obstacle reproduces the harmonic capacity") {
  const Grid g = centered(2, 1.0, 1.0 / 32);
  const double R = 0.5;
  const WienerProfile p =
      delta_profile(g, o, R / 2, 3, ObstacleMeasure{mask(g, Ball{o, R})}, EllipticCoefficients::laplacian(2), opts());
  for (double d : p.delta) CHECK(d == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(wiener_modulus(p, p.rho.back(), R / 2) == doctest::Approx(2 * p.rho.back() / R).epsilon(1e-8));
}

TEST_CASE("a single node loses capacity under refinement") {
  // Discrete point capacity in B_2rho is close to 2 pi / ln(2 rho / (c h)), so
  // delta = Cap_point / Cap(B_rho, B_2rho) ~ ln 2 / ln(rho / (c h)) shrinks as h -> 0.
  const double rho = 0.125;
  double last = 1.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const Grid g = centered(2, 0.25, h);
    const WienerProfile p = delta_profile(g, o, rho, 1, ObstacleMeasure{NodeSet(g, {g.nearest_node(o)})},
                                          EllipticCoefficients::laplacian(2), opts());
    const double d = p.delta[0];
    CHECK(d < last);
    const double model = std::log(2.0) / std::log(rho / (0.2 * h));
    CHECK(d == doctest::Approx(model).epsilon(0.3));
    last = d;
  }
}

TEST_CASE("classifier verdicts") {
  const auto lap = EllipticCoefficients::laplacian(2);
  auto run = [&](auto make_mu) {
    std::vector<WienerProfile> ps;
    for (double h : {1.0 / 32, 1.0 / 64}) {
      const Grid g = centered(2, 1.0, h);
      ps.push_back(delta_profile(g, o, 0.5, 4, make_mu(g), lap, opts(2.0)));
    }
    return classify_point(ps[0], ps[1]);
  };
  CHECK(run([](const Grid&) { return Measure{ZeroMeasure{}}; }).verdict == Verdict::not_wiener_point);
  CHECK(run([](const Grid& g) { return Measure{ObstacleMeasure{mask(g, HalfSpace{{1, 0, 0}, 0})}}; }).verdict ==
        Verdict::wiener_point);
  CHECK(run([](const Grid& g) { return Measure{ObstacleMeasure{NodeSet(g, {g.nearest_node(o)})}}; }).verdict ==
        Verdict::not_wiener_point);
}

TEST_CASE("delta is invariant under scaling the operator and the measure together") {
  const Grid g = centered(2, 1.0, 1.0 / 32);
  const auto lap = EllipticCoefficients::laplacian(2);
  const WienerProfile a = delta_profile(g, o, 0.5, 3, make_density(Field(g, 30.0)), lap, opts());
  const WienerProfile b = delta_profile(g, o, 0.5, 3, make_density(Field(g, 90.0)), lap.scaled(3.0), opts());
  for (std::size_t k = 0; k < a.delta.size(); ++k) CHECK(std::abs(a.delta[k] - b.delta[k]) <= 5e-10);
}

TEST_CASE("delta for a general operator sits between ellipticity multiples of the Laplacian one") {
  const Grid g = centered(2, 1.0, 1.0 / 32);
  const Measure mu = make_density(Field(g, 30.0));
  const double lam = 0.5, Lam = 2.0;
  const auto osc = EllipticCoefficients::variable(
      2,
      [](const Point& x) {
        Matrix3 a{};
        const double s = 1.25 + 0.75 * std::sin(13 * x[0]) * std::cos(11 * x[1]);
        a[0][0] = s;
        a[1][1] = 2.5 - s;
        return a;
      },
      lam, Lam, "oscillating");
  const auto lap = EllipticCoefficients::laplacian(2);
  const WienerProfile dl = delta_profile(g, o, 0.5, 3, mu, lap, opts());
  const WienerProfile dg = delta_profile(g, o, 0.5, 3, mu, osc, opts());
  for (std::size_t k = 0; k < dl.delta.size(); ++k) {
    CHECK(dg.delta[k] >= lam / Lam * dl.delta[k] * (1 - 1e-8));
    CHECK(dg.delta[k] <= Lam / lam * dl.delta[k] * (1 + 1e-8));
  }
}

TEST_CASE("delta and omega stay in their natural ranges on a computed profile") {
  const Grid g = centered(3, 1.0, 1.0 / 16);
  const WienerProfile p = delta_profile(g, o, 0.5, 3, ObstacleMeasure{mask(g, HalfSpace{{1, 0, 0}, 0})},
                                        EllipticCoefficients::laplacian(3), opts());
  for (double d : p.delta_raw) {
    CHECK(d >= -5e-10);
    CHECK(d <= 1 + 5e-10);
  }
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    CHECK(p.omega[i] <= 1 + 5e-10);
    CHECK(p.omega[i] >= p.rho[i] / p.R * (1 - 1e-12));
  }
}

TEST_CASE("classical and relaxed boundary moduli agree") {
  const AxisRange box[2] = {{0, 1}, {0, 1}};
  const Grid g = Grid::build(2, box, 1.0 / 32);
  const NodeSet outer = NodeSet::all(g);
  SUBCASE("edge midpoint of a half-plane is regular") {
    const NodeSet inner = mask(g, HalfSpace{{1, 0, 0}, 0.5});
    const BoundaryWienerProfile b =
        boundary_wiener_modulus(inner, outer, {0.5, 0.5, 0}, 0.2, 3, EllipticCoefficients::laplacian(2), opts());
    CHECK(b.identity_holds);
    for (double d : b.classical.delta) CHECK(d > 0.3);
  }
  SUBCASE("disc") {
    const NodeSet inner = mask(g, Ball{{0.5, 0.5, 0}, 0.3});
    const BoundaryWienerProfile b =
        boundary_wiener_modulus(inner, outer, {0.8, 0.5, 0}, 0.1, 2, EllipticCoefficients::laplacian(2), opts());
    CHECK(b.identity_holds);
    for (double gap : b.gap) CHECK(gap <= 5e-10);
  }
}
