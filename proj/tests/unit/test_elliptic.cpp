#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rdp/capacity.hpp"
#include "rdp/elliptic.hpp"
#include "rdp/error.hpp"
#include "rdp/sparse.hpp"

using namespace rdp;

namespace {

Grid square(double h) {
  const AxisRange box[2] = {{0.0, 1.0}, {0.0, 1.0}};
  return Grid::build(2, box, h);
}

}  // namespace

TEST_CASE("bilinear element matrix on the unit cell") {
  const AxisRange box[2] = {{0, 2}, {0, 2}};
  const Grid g = Grid::build(2, box, 1.0);
  const auto k = laplacian_element(g);
  for (int a = 0; a < 4; ++a) CHECK(k[std::size_t(a * 9)] == doctest::Approx(2.0 / 3.0));
  CHECK(k[0 * 8 + 1] == doctest::Approx(-1.0 / 6.0));
  CHECK(k[0 * 8 + 2] == doctest::Approx(-1.0 / 6.0));
  CHECK(k[0 * 8 + 3] == doctest::Approx(-1.0 / 3.0));
  CHECK(k[1 * 8 + 2] == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("trilinear element matrix equals the tensor product of 1-D blocks") {
  const AxisRange box[3] = {{0, 2}, {0, 2}, {0, 2}};
  const Grid g = Grid::build(3, box, 1.0);
  const auto k = laplacian_element(g);
  // 1-D stiffness and mass on a unit interval.
  const double k1[2][2] = {{1, -1}, {-1, 1}};
  const double m1[2][2] = {{1.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 3}};
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      double v = 0.0;
      for (int d = 0; d < 3; ++d) {
        double p = 1.0;
        for (int e = 0; e < 3; ++e) {
          const int ia = (a >> e) & 1, ib = (b >> e) & 1;
          p *= e == d ? k1[ia][ib] : m1[ia][ib];
        }
        v += p;
      }
      CHECK(k[std::size_t(a * 8 + b)] == doctest::Approx(v));
    }
  }
}

TEST_CASE("element matrix is linear in a constant coefficient") {
  const Grid g = square(0.25);
  Matrix3 id{}, three{};
  for (int d = 0; d < 3; ++d) {
    id[std::size_t(d)][std::size_t(d)] = 1.0;
    three[std::size_t(d)][std::size_t(d)] = 3.0;
  }
  const auto a = element_matrix(g, id), b = element_matrix(g, three);
  for (std::size_t i = 0; i < 16; ++i) CHECK(b[i] == doctest::Approx(3.0 * a[i]));
}

TEST_CASE("interior rows of the stiffness matrix sum to zero") {
  const Grid g = square(0.25);
  const SystemMatrix k = assemble_stiffness(NodeSet::all(g), EllipticCoefficients::laplacian(2));
  const auto& sp = *k.space;
  const auto rp = k.matrix.row_ptr();
  const auto vals = k.matrix.values();
  for (std::size_t l = 0; l < sp.size(); ++l) {
    if (!sp.is_free_local(l)) continue;
    double s = 0.0;
    for (std::size_t p = rp[l]; p < rp[l + 1]; ++p) s += vals[p];
    CHECK(std::abs(s) < 1e-14);
  }
  CHECK(k.symmetry_error == 0.0);
}

TEST_CASE("conjugate gradients") {
  SUBCASE("identity") {
    const std::vector<double> b{1, -2, 3};
    const CgResult r = solve_spd(CsrMatrix::identity(3), b);
    for (int i = 0; i < 3; ++i) CHECK(r.x[std::size_t(i)] == b[std::size_t(i)]);
  }
  SUBCASE("1-D Laplacian with three unknowns") {
    const CsrMatrix a = CsrMatrix::from_triplets(
        3, 3, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}, {1, 2, -1}, {2, 1, -1}, {2, 2, 2}});
    const CgResult r = solve_spd(a, std::vector<double>{1, 1, 1}, CgOptions{1e-14});
    CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.x[2] == doctest::Approx(1.5).epsilon(1e-12));
  }
  SUBCASE("random SPD system meets the residual contract") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    double b[10][10];
    for (auto& row : b)
      for (auto& v : row) v = u(rng);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        double s = i == j ? 10.0 : 0.0;
        for (std::size_t k = 0; k < 10; ++k) s += b[k][i] * b[k][j];
        t.push_back({i, j, s});
      }
    }
    const CsrMatrix a = CsrMatrix::from_triplets(10, 10, t);
    std::vector<double> rhs(10);
    for (auto& v : rhs) v = u(rng);
    const double tol = 1e-10;
    const CgResult r = solve_spd(a, rhs, CgOptions{tol});
    std::vector<double> ax = a.multiply(r.x);
    for (std::size_t i = 0; i < 10; ++i) ax[i] -= rhs[i];
    CHECK(norm2(ax) <= tol * norm2(rhs));
  }
  SUBCASE("indefinite matrix is refused") {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}});
    CHECK_THROWS_AS(solve_spd(a, std::vector<double>{1, 0}), SolverError);
  }
}

TEST_CASE("Dirichlet energy of simple fields") {
  const Grid g = square(0.125);
  const SystemMatrix k = assemble_stiffness(NodeSet::all(g), EllipticCoefficients::laplacian(2));
  CHECK(std::abs(energy_of(k, Field(g, 3.0))) < 1e-13);
  const Field x = Field::from_function(g, [](const Point& p) { return p[0]; });
  CHECK(energy_of(k, x) == doctest::Approx(1.0).epsilon(1e-12));
  const Field y = Field::from_function(g, [](const Point& p) { return p[1]; });
  CHECK(std::abs(bilinear(k, x, y)) < 1e-13);
}

TEST_CASE("capacitary potential energy equals the reported capacity") {
  const Grid g = square(1.0 / 32);
  const NodeSet dom = mask(g, Ball{{0.5, 0.5, 0}, 0.45});
  const NodeSet e = mask(g, Ball{{0.5, 0.5, 0}, 0.15});
  const CapacitySolver cs(dom, EllipticCoefficients::laplacian(2), CapacityOptions{1e-10});
  const CapacityReport r = cs.harmonic(e);
  CHECK(energy_of(cs.stiffness(), r.potential) == doctest::Approx(r.value).epsilon(1e-8));
}

TEST_CASE("Q1 interpolation reproduces bilinear functions") {
  const Grid g = square(0.25);
  const Field f = Field::from_function(g, [](const Point& p) { return 1 + 2 * p[0] - p[1] + 3 * p[0] * p[1]; });
  for (const Point x : {Point{0.1, 0.7, 0}, Point{0.33, 0.5, 0}, Point{1.0, 1.0, 0}}) {
    CHECK(interpolate(f, x) == doctest::Approx(1 + 2 * x[0] - x[1] + 3 * x[0] * x[1]));
  }
}

TEST_CASE("coefficient bounds are enforced") {
  Matrix3 a{};
  a[0][0] = 0.5;
  a[1][1] = 2.0;
  const auto c = EllipticCoefficients::constant(2, a, 1.0, 2.0);
  CHECK_THROWS_AS(assemble_stiffness(NodeSet::all(square(0.25)), c), CoefficientError);
  CHECK_THROWS_AS(EllipticCoefficients::constant(2, a, 2.0, 1.0), CoefficientError);
}

TEST_CASE("non-symmetric coefficients are symmetrized with a warning") {
  Matrix3 a{};
  a[0][0] = a[1][1] = 1.0;
  a[0][1] = 0.2;
  const auto c = EllipticCoefficients::constant(2, a, 0.8, 1.2);
  const SystemMatrix k = assemble_stiffness(NodeSet::all(square(0.25)), c);
  CHECK_FALSE(k.warnings.empty());
  CHECK(k.matrix.symmetry_error() < 1e-14);
}
