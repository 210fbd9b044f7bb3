#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdp/energy.hpp"
#include "rdp/error.hpp"
#include "rdp/relaxed.hpp"

using namespace rdp;

namespace {

Grid centered(int dim, double half, double h) {
  const AxisRange box[3] = {{-half, half}, {-half, half}, {-half, half}};
  return Grid::build(dim, std::span<const AxisRange>(box, std::size_t(dim)), h);
}

const Point o{0, 0, 0};

// Local solution on B_1 with the half-plane {x <= 0} as obstacle.
Solution halfspace_solution(double h) {
  const Grid g = centered(2, 1.0, h);
  RelaxedProblem p;
  p.domain = mask(g, Ball{o, 1.0});
  p.mu = ObstacleMeasure{mask(g, HalfSpace{{1, 0, 0}, 0})};
  p.g = Field::from_function(g, [](const Point& x) { return std::max(x[0], 0.0) * (1 + 0.5 * x[1]); });
  return solve_relaxed(p, 1e-10);
}

}  // namespace

TEST_CASE("local energy of trivial fields") {
  const Grid g = centered(2, 1.0, 1.0 / 32);
  const auto lap = EllipticCoefficients::laplacian(2);
  GreenWeights w(g, o, 0.125, 0.0625, lap, GreenWeightOptions{1e-10});
  CHECK(local_energy_V(Field(g, 0.0), o, 0.0625, ZeroMeasure{}, w).value == 0.0);
  const LocalEnergy c = local_energy_V(Field(g, 1.7), o, 0.0625, ZeroMeasure{}, w);
  CHECK(c.value == doctest::Approx(1.7 * 1.7).epsilon(1e-12));
  CHECK(c.grad_term == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("V is monotone in r for a solved problem") {
  const Solution s = halfspace_solution(1.0 / 64);
  const Grid& g = s.u.grid;
  const double radii[] = {0.25, 0.125, 0.0625};
  const EnergyProfile e = energy_profile(s.u, o, radii, ObstacleMeasure{mask(g, HalfSpace{{1, 0, 0}, 0})},
                                         SignedDensity{}, EllipticCoefficients::laplacian(2), 0.125, 1e-10);
  CHECK(e.monotone);
  CHECK(e.V[1] <= e.V[0]);
  CHECK(e.V[2] <= e.V[1]);
}

TEST_CASE("mu-energy") {
  const double r = 0.25;
  const Grid g = centered(2, 0.5, r / 20);
  CHECK(mu_energy(Field(g, 0.0), o, r, ZeroMeasure{}) == 0.0);
  const Field x = Field::from_function(g, [](const Point& p) { return p[0]; });
  CHECK(mu_energy(x, o, r, ZeroMeasure{}) == doctest::Approx(std::numbers::pi * r * r).epsilon(0.02));
  const Measure mu = make_density(Field(g, 3.0));
  double last = 0.0;
  for (double s : {0.05, 0.1, 0.2, 0.3}) {
    const double v = mu_energy(x, o, s, mu);
    CHECK(v >= last);
    last = v;
  }
  // Obstacle terms: free when u vanishes there, infinite otherwise.
  const NodeSet left = mask(g, HalfSpace{{1, 0, 0}, -0.1});
  const Field xp = Field::from_function(g, [](const Point& p) { return std::max(p[0], 0.0); });
  CHECK(std::isfinite(mu_energy(xp, o, r, ObstacleMeasure{left})));
  CHECK(std::isinf(mu_energy(x, o, r, ObstacleMeasure{left})));
}

TEST_CASE("energy estimate with no measure reduces to monotonicity") {
  EnergyProfile e;
  e.radii = {0.5, 0.25, 0.125, 0.0625};
  e.V = {4.0, 3.0, 2.5, 2.4};
  e.kato = {0, 0, 0, 0};
  const WienerProfile w = profile_from_delta(o, 0.5, 0.5, {0, 0, 0, 0});
  const EstimateFit f = verify_theorem_3_1(e, w, 100);
  REQUIRE(f.found);
  CHECK(f.k <= 1.0);
  CHECK(f.max_ratio <= 1.0 + 1e-12);
  for (double k : f.k_by_beta) CHECK(k == doctest::Approx(f.k));
}

TEST_CASE("energy estimate dominated by the Kato term") {
  EnergyProfile e;
  e.radii = {0.5, 0.25, 0.125};
  e.V = {1e-6, 1e-6, 1e-6};
  e.kato = {10.0, 5.0, 2.5};
  const WienerProfile w = profile_from_delta(o, 0.5, 0.5, {0.5, 0.5, 0.5});
  const EstimateFit f = verify_theorem_3_1(e, w, 100);
  REQUIRE(f.found);
  // Every outer radius used has a Kato norm of at least 5.
  CHECK(f.k <= 1e-6 / 25.0);
}

TEST_CASE("fit picks the smallest passing k") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const double radii[] = {1, 0.5, 0.25, 0.125, 0.0625};
  std::vector<PairTerms> pairs;
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t i = j + 1; i < 5; ++i) {
      const double omega = std::pow(radii[i] / radii[j], 0.6);
      const double a = u(rng), b = 0.1 * u(rng);
      pairs.push_back({i, j, 2.0 * (std::pow(omega, 0.7) * a + b) * u(rng), a, b, omega});
    }
  }
  const EstimateFit f = fit_estimate(radii, pairs, 100);
  REQUIRE(f.found);
  CHECK(f.max_ratio <= 1 + 1e-12);
  REQUIRE(f.k_by_beta.size() == 20);
  for (double k : f.k_by_beta) CHECK(f.k <= k);
  for (const auto& p : pairs) CHECK(p.lhs <= f.k * (std::pow(p.omega, f.beta) * p.a + p.b) * (1 + 1e-12));
  CHECK(f.beta_max >= f.beta);
}

TEST_CASE("continuity theorem refuses a point that is not a Wiener point") {
  const Grid g = centered(2, 1.0, 1.0 / 16);
  EnergyProfile e;
  e.radii = {0.5, 0.25};
  const WienerProfile w = profile_from_delta(o, 0.5, 0.5, {0, 0});
  const DecayReport d = verify_theorem_3_2(Field(g, 1.0), e, w, Verdict::not_wiener_point, MuEnergyInputs{});
  CHECK(d.refused);
}

TEST_CASE("oscillation decays at the edge of a half-plane obstacle") {
  const Solution s = halfspace_solution(1.0 / 64);
  const double radii[] = {0.5, 0.25, 0.125, 0.0625};
  std::vector<double> osc;
  for (double r : radii) osc.push_back(local_oscillation(s.u, o, r).osc);
  for (std::size_t k = 1; k < osc.size(); ++k) CHECK(osc[k] < osc[k - 1]);
  // u grows linearly off a flat obstacle, so the mean shrinks like r: 1/8 over three levels.
  const double ratio = local_oscillation(s.u, o, 0.0625).mean_abs / local_oscillation(s.u, o, 0.5).mean_abs;
  CHECK(ratio == doctest::Approx(0.125).epsilon(0.2));
}

TEST_CASE("integration lemma") {
  SUBCASE("worked value") {
    // beta = 1/2, k0 = e^{1/2}, |log q|^{-1} = 1 / ln 2.
    for (double t : {0.5, 0.25, 0.1}) {
      const double b = integration_lemma_bound(1.0, 0.5, std::log(1.0 / t), 1.0);
      CHECK(b == doctest::Approx(1.64872 * std::pow(t, 0.72135)).epsilon(1e-5));
    }
  }
  SUBCASE("delta = 0 leaves the factor e^beta") {
    const std::vector<double> v{3.0, 2.0, 2.0, 1.0}, delta(3, 0.0);
    const IntegrationBound b = integration_lemma(v, delta, 0.5, 2.0);
    for (double x : b.bound) CHECK(x == doctest::Approx(std::exp(2.0 / 3.0) * 3.0));
    CHECK(b.dominated);
  }
  SUBCASE("power law against the recursion") {
    const double q = 0.5, k = 3.0;
    const double s = std::log(1 + k) / std::log(1 / q);
    std::vector<double> v, delta(7, 1.0);
    for (int j = 0; j <= 7; ++j) v.push_back(std::pow(std::pow(q, j), s));
    const IntegrationBound b = integration_lemma(v, delta, q, k);
    CHECK(b.dominated);
    for (std::size_t j = 0; j < v.size(); ++j) {
      CHECK(v[j] <= b.bound[j] * (1 + 1e-12));
      CHECK(b.recursion[j] <= b.bound[j] * (1 + 1e-12));
    }
  }
  SUBCASE("hypothesis violation is reported") {
    const std::vector<double> v{1.0, 0.9}, delta{1.0};
    CHECK_THROWS_AS(integration_lemma(v, delta, 0.5, 1.0), Error);
  }
}

TEST_CASE("sup and energy lemmas") {
  const auto lap = EllipticCoefficients::laplacian(2);
  SUBCASE("zero field is degenerate") {
    const Grid g = centered(2, 1.0, 1.0 / 32);
    GreenWeights w(g, o, 0.125, 0.125, lap);
    const LemmaReport r = verify_lemmas_3_1_3_2(Field(g, 0.0), o, 0.25, 0.5, ZeroMeasure{}, SignedDensity{}, w);
    CHECK(r.degenerate);
  }
  SUBCASE("harmonic field gives an h-stable constant") {
    std::vector<double> ks;
    for (double h : {1.0 / 32, 1.0 / 64}) {
      const Grid g = centered(2, 1.0, h);
      const Field u = Field::from_function(g, [](const Point& p) { return 2.0 + p[0]; });
      GreenWeights w(g, o, 0.125, 0.125, lap);
      const LemmaReport r = verify_lemmas_3_1_3_2(u, o, 0.25, 0.5, ZeroMeasure{}, SignedDensity{}, w);
      CHECK(std::isfinite(r.k_sup));
      CHECK(std::isfinite(r.k_energy));
      ks.push_back(r.k_energy);
    }
    CHECK(ks[1] == doctest::Approx(ks[0]).epsilon(0.2));
  }
  SUBCASE("large source dominates") {
    const Grid g = centered(2, 1.0, 1.0 / 32);
    GreenWeights w(g, o, 0.125, 0.125, lap);
    const LemmaReport r =
        verify_lemmas_3_1_3_2(Field(g, 1e-4), o, 0.25, 0.5, ZeroMeasure{}, SignedDensity{Field(g, 100.0)}, w);
    CHECK(r.k_sup <= 1.0);
    CHECK(r.k_energy <= 1.0);
  }
}

TEST_CASE("Green weights are monotone in the ball") {
  // Domain monotonicity of Green functions survives the two-level scheme.
  const Grid g = centered(2, 1.0, 1.0 / 32);
  GreenWeights w(g, o, 0.125, 0.25, EllipticCoefficients::laplacian(2), GreenWeightOptions{1e-10, 32});
  const Field small = w.at(0.0625), big = w.at(0.25);
  CHECK(w.coarse_spacing() > g.spacing());
  for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(small[i] <= big[i] + 1e-9);
}
