#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdp/error.hpp"
#include "rdp/green.hpp"

using namespace rdp;

namespace {

Grid centered(int dim, double half, double h) {
  const AxisRange box[3] = {{-half, half}, {-half, half}, {-half, half}};
  return Grid::build(dim, std::span<const AxisRange>(box, std::size_t(dim)), h);
}

const Point o{0, 0, 0};

}  // namespace

TEST_CASE("Green function of the unit disc at its center") {
  // Outside B_rho the averaged load gives exactly ln(1/|x|) / (2 pi).
  const Grid g = centered(2, 1.0, 1.0 / 64);
  const GreenField gf = approximate_green(g, Ball{o, 1.0}, EllipticCoefficients::laplacian(2), o, -1.0, 1e-10);
  int checked = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double r = distance(g.coords(i), o);
    if (r < 0.3 || r > 0.8) continue;
    const double exact = std::log(1.0 / r) / (2 * std::numbers::pi);
    CHECK(gf.values[i] == doctest::Approx(exact).epsilon(0.03));
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("ball average weights form a partition of unity") {
  const Grid g = centered(2, 1.0, 1.0 / 32);
  for (double rho : {1.0 / 16, 1.0 / 8, 0.3}) {
    double s = 0.0;
    for (const auto& [i, w] : ball_average_weights(g, {0.013, -0.02, 0}, rho)) {
      CHECK(w > 0.0);
      s += w;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("Green function symmetry and normalization") {
  const double tol = 1e-10;
  for (int dim : {2, 3}) {
    const Grid g = centered(dim, 1.0, dim == 2 ? 1.0 / 32 : 1.0 / 12);
    const GreenSolver s(g, Ball{o, 1.0}, EllipticCoefficients::laplacian(dim), tol);
    const Point y1{0.1, 0.05, 0}, y2{-0.3, 0.2, dim == 3 ? 0.1 : 0.0};
    const double rho = 2 * g.spacing();
    const GreenField g1 = s.solve(y1, rho), g2 = s.solve(y2, rho);
    const double a = ball_average(g1.values, y2, rho), b = ball_average(g2.values, y1, rho);
    CHECK(std::abs(a - b) <= 5 * tol * std::max(a, b));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    const FemSpace& sp = *g1.stiffness->space;
    for (int t = 0; t < 10; ++t) {
      Field v(g, 0.0);
      for (std::size_t l = 0; l < sp.size(); ++l)
        if (sp.is_free_local(l)) v.values[sp.nodes()[l]] = u(rng);
      const double lhs = bilinear(*g1.stiffness, v, g1.values), avg = ball_average(v, y1, rho);
      CHECK(std::abs(lhs - avg) <= 2 * tol * std::abs(avg));
    }
  }
}

TEST_CASE("capacity bound constants in the concentric case") {
  for (int dim : {2, 3}) {
    const Grid g = centered(dim, 0.5, dim == 2 ? 1.0 / 64 : 1.0 / 32);
    const auto lap = EllipticCoefficients::laplacian(dim);
    const GreenField gf = approximate_green(g, Ball{o, 0.5}, lap, o, -1.0, 1e-10);
    const double radii[] = {0.0625, 0.125, 0.25};
    const GreenBoundReport rep = check_green_bounds(gf, lap, 0.5, radii, 1e-10);
    CHECK(rep.consistent);
    for (const auto& r : rep.rows) {
      CHECK(r.k >= 0.5);
      CHECK(r.k <= 2.0);
    }
    CHECK(std::isfinite(rep.alpha));
  }
}

TEST_CASE("bound constants are invariant under scaling the operator") {
  const Grid g = centered(2, 0.5, 1.0 / 32);
  const auto lap = EllipticCoefficients::laplacian(2), big = lap.scaled(4.0);
  const double radii[] = {0.125, 0.25};
  const GreenBoundReport a = check_green_bounds(approximate_green(g, Ball{o, 0.5}, lap, o, -1.0, 1e-11), lap,
                                                0.5, radii, 1e-11);
  const GreenBoundReport b = check_green_bounds(approximate_green(g, Ball{o, 0.5}, big, o, -1.0, 1e-11), big,
                                                0.5, radii, 1e-11);
  CHECK(b.k == doctest::Approx(a.k).epsilon(1e-7));
  CHECK(b.alpha == doctest::Approx(a.alpha).epsilon(1e-7));
}

TEST_CASE("pointwise constant is stable under refinement") {
  std::vector<double> alphas;
  for (double h : {1.0 / 32, 1.0 / 64}) {
    const Grid g = centered(2, 0.5, h);
    const auto lap = EllipticCoefficients::laplacian(2);
    const double radii[] = {0.25};
    alphas.push_back(check_green_bounds(approximate_green(g, Ball{o, 0.5}, lap, o, -1.0, 1e-10), lap, 0.5, radii, 1e-10).alpha);
  }
  CHECK(alphas[1] == doctest::Approx(alphas[0]).epsilon(0.2));
}

TEST_CASE("singularity outside the ball is refused") {
  const Grid g = centered(2, 1.0, 1.0 / 16);
  const GreenSolver s(g, Ball{o, 0.5}, EllipticCoefficients::laplacian(2));
  CHECK_THROWS_AS(s.solve({0.7, 0, 0}), GeometryError);
}
