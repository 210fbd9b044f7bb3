#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdp/capacity.hpp"
#include "rdp/error.hpp"

using namespace rdp;

namespace {

Grid centered(int dim, double half, double h) {
  const AxisRange box[3] = {{-half, half}, {-half, half}, {-half, half}};
  return Grid::build(dim, std::span<const AxisRange>(box, std::size_t(dim)), h);
}

const Point o{0, 0, 0};

}  // namespace

TEST_CASE("empty set has zero capacity") {
  const Grid g = centered(2, 0.5, 1.0 / 16);
  const auto r = harmonic_capacity(NodeSet::none(g), mask(g, Ball{o, 0.45}), EllipticCoefficients::laplacian(2));
  CHECK(r.value == 0.0);
}

TEST_CASE("concentric capacity in the plane") {
  // u(r) = ln(2 rho / r) / ln 2 gives 2 pi / ln 2.
  const double rho = 0.1;
  const Grid g = centered(2, 0.25, rho / 20);
  const auto r = harmonic_capacity(mask(g, Ball{o, rho}), mask(g, Ball{o, 2 * rho}),
                                   EllipticCoefficients::laplacian(2));
  CHECK(r.value == doctest::Approx(2 * std::numbers::pi / std::log(2.0)).epsilon(0.02));
  CHECK(r.residual <= 1e-8);
  for (double v : r.potential.values) {
    CHECK(v >= -1e-9);
    CHECK(v <= 1 + 1e-9);
  }
}

TEST_CASE("capacity scales with the coefficients") {
  const Grid g = centered(2, 0.5, 1.0 / 32);
  const NodeSet e = mask(g, Ball{o, 0.1}), d = mask(g, Ball{o, 0.4});
  const auto lap = EllipticCoefficients::laplacian(2);
  const double a = harmonic_capacity(e, d, lap, CapacityOptions{1e-10}).value;
  const double b = harmonic_capacity(e, d, lap.scaled(2.5), CapacityOptions{1e-10}).value;
  CHECK(b == doctest::Approx(2.5 * a).epsilon(1e-8));
}

TEST_CASE("mu-capacity special cases") {
  const double rho = 0.1;
  const Grid g = centered(2, 0.25, rho / 16);
  const NodeSet e = mask(g, Ball{o, rho}), d = mask(g, Ball{o, 2 * rho});
  const auto lap = EllipticCoefficients::laplacian(2);
  const CapacitySolver cs(d, lap, CapacityOptions{1e-10});
  const double cap = cs.harmonic(e).value;

  CHECK(cs.mu(e, ZeroMeasure{}).value == 0.0);
  CHECK(cs.mu(e, ObstacleMeasure{e}).value == doctest::Approx(cap).epsilon(1e-8));

  // Competitors: the harmonic potential and u = 1.
  for (double c : {1.0, 30.0, 1000.0}) {
    const Measure mu = make_density(Field(g, c));
    const double v = cs.mu(e, mu).value;
    double mass = 0.0;
    const auto m = lumped_node_mass(g, restrict(mu, e));
    for (double x : m) mass += x;
    CHECK(v >= 0.0);
    CHECK(v <= std::min(cap, mass) * (1 + 1e-8));
  }
}

TEST_CASE("laws of the mu-capacity on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  for (int dim : {2, 3}) {
    const Grid g = centered(dim, 0.5, dim == 2 ? 1.0 / 24 : 1.0 / 10);
    const auto lap = EllipticCoefficients::laplacian(dim);
    for (int t = 0; t < 3; ++t) {
      const double r1 = 0.1 + 0.1 * u(rng);
      LawInstance inst;
      inst.e = mask(g, Ball{o, r1});
      inst.f = mask(g, Ball{{0.05, 0, 0}, r1 + 0.05});
      inst.nested = inst.e.is_subset_of(inst.f);
      inst.domain = mask(g, Ball{o, 0.48});
      inst.small_domain = mask(g, Ball{o, 0.35});
      const double c = 5 + 50 * u(rng);
      inst.mu = make_density(Field(g, c));
      inst.nu = make_density(Field(g, 2 * c));
      const LawReport rep = check_prop_1_1(inst, lap);
      for (const auto& chk : rep.checks) {
        INFO(chk.name << ": " << chk.lhs << " vs " << chk.rhs);
        CHECK(chk.pass);
      }
    }
  }
}

TEST_CASE("submodularity with E = F is an equality") {
  const Grid g = centered(2, 0.5, 1.0 / 24);
  LawInstance inst;
  inst.e = inst.f = mask(g, Ball{o, 0.15});
  inst.nested = true;
  inst.domain = mask(g, Ball{o, 0.48});
  inst.small_domain = mask(g, Ball{o, 0.3});
  inst.mu = make_density(Field(g, 10.0));
  inst.nu = make_density(Field(g, 20.0));
  const LawReport rep = check_prop_1_1(inst, EllipticCoefficients::laplacian(2), CapacityOptions{1e-10});
  bool seen = false;
  for (const auto& chk : rep.checks) {
    if (chk.name.find("c_submodular") == std::string::npos) continue;
    seen = true;
    CHECK(chk.lhs == doctest::Approx(chk.rhs).epsilon(1e-8));
  }
  CHECK(seen);
}

TEST_CASE("Poincare ratio") {
  const double r = 0.2;
  const Grid g = centered(2, 0.5, r / 16);
  const auto lap = EllipticCoefficients::laplacian(2);
  SUBCASE("zero field reads as 0") {
    const Field z(g, 0.0);
    const PoincareReport p = poincare_check(std::span(&z, 1), Ball{o, r}, make_density(Field(g, 5.0)), lap);
    CHECK(p.sup_ratio == 0.0);
  }
  SUBCASE("constants against a uniform density") {
    // For u = c the ratio reduces to Cap_mu / (r^N m); the binding fact is Cap_mu <= m |B_r|.
    const double m = 40.0;
    const Field c(g, 2.0);
    const Measure mu = make_density(Field(g, m));
    const PoincareReport p = poincare_check(std::span(&c, 1), Ball{o, r}, mu, lap);
    double mass = 0.0;
    for (double x : lumped_node_mass(g, restrict(mu, mask(g, Ball{o, r})))) mass += x;
    CHECK(p.capacity <= mass * (1 + 1e-8));
    CHECK(p.sup_ratio > 0.0);
  }
}

TEST_CASE("Poincare constant under an obstacle is h-stable") {
  const double r = 0.2;
  std::vector<double> sups;
  for (int n : {8, 16, 32}) {
    const Grid g = centered(2, 0.5, r / n);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Field> fields;
    for (int k = 0; k < 4; ++k) {
      const double a = u(rng), b = u(rng), c = u(rng);
      // Vanish on the obstacle so the mu term stays finite.
      fields.push_back(Field::from_function(g, [&](const Point& p) {
        const double s = std::hypot(p[0], p[1]);
        return s <= r / 2 + 1e-9 ? 0.0 : (s - r / 2) * (a + b * p[0] + c * p[1] * p[1]);
      }));
    }
    const PoincareReport p = poincare_check(fields, Ball{o, r}, ObstacleMeasure{mask(g, Ball{o, r / 2})},
                                            EllipticCoefficients::laplacian(2));
    sups.push_back(p.sup_ratio);
  }
  for (double s : sups) {
    CHECK(std::isfinite(s));
    CHECK(s > 0.0);
  }
  CHECK(sups[2] / sups[1] == doctest::Approx(1.0).epsilon(0.25));
}
