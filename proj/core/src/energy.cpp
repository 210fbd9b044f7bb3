#include "rdp/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rdp/capacity.hpp"
#include "rdp/error.hpp"
#include "rdp/relaxed.hpp"

namespace rdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool box_holds(const Grid& g, const Point& x0, double radius) {
  const double tol = 1e-9 * g.spacing();
  for (int d = 0; d < g.dim(); ++d) {
    const auto du = std::size_t(d);
    if (x0[du] - radius < g.lower()[du] - tol || x0[du] + radius > g.upper()[du] + tol)
      return false;
  }
  return true;
}

// 0/0 is read as 0 throughout the fits.
double ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den <= 0.0) return kInf;
  return num / den;
}

bool obstacle_violated(const Field& u, const NodeSet& ball, const Measure& mu) {
  const auto* ob = std::get_if<ObstacleMeasure>(&mu);
  if (!ob) return false;
  for (auto i : set_intersection(ball, ob->set))
    if (u.values[i] != 0.0) return true;
  return false;
}

double kato_on(const SignedDensity& nu, const Point& x0, double r, int dim) {
  if (nu.density.values.empty()) return 0.0;
  return kato_norm(nu, Ball{x0, r}, dim == 2 ? 4.0 * r : 0.0).value;
}

}  // namespace

GreenWeights::GreenWeights(const Grid& fine, const Point& x0, double q, double r_max,
                           const EllipticCoefficients& coeffs, GreenWeightOptions opts)
    : fine_(fine),
      x0_(x0),
      q_(q),
      r_max_(r_max),
      s_(2.0 * r_max),
      coarse_h_(fine.spacing()),
      coeffs_(coeffs),
      opts_(opts) {
  if (!(q > 0.0 && q < 1.0)) throw GeometryError("q must lie in (0, 1)");
  if (!(r_max > 0.0)) throw GeometryError("radius must be positive");
  const double budget =
      opts.radius_budget > 0.0 ? opts.radius_budget : (fine.dim() == 2 ? 256.0 : 40.0);
  const double big = 2.0 * r_max / q;
  const double h = fine.spacing();
  // A ball that fits the budget but not the fine box still goes through the coarse grid.
  if (big / h <= budget * (1.0 + 1e-12) && box_holds(fine, x0, big)) return;
  int j = 1;
  while (big / (h * std::ldexp(1.0, j)) > budget * (1.0 + 1e-12)) ++j;
  coarse_h_ = h * std::ldexp(1.0, j);
  const double m = std::ceil(big / coarse_h_ - 1e-9) + 1.0;
  std::array<AxisRange, 3> box{};
  for (int d = 0; d < fine.dim(); ++d) {
    const auto du = std::size_t(d);
    box[du] = {x0[du] - m * coarse_h_, x0[du] + m * coarse_h_};
  }
  coarse_ = std::make_unique<Grid>(
      Grid::build(fine.dim(), std::span<const AxisRange>(box.data(), std::size_t(fine.dim())),
                  coarse_h_));
}

const Field& GreenWeights::at(double r) {
  if (auto it = cache_.find(r); it != cache_.end()) return it->second;
  if (r > r_max_ * (1.0 + 1e-12)) throw GeometryError("radius above the prepared maximum");
  const double radius = 2.0 * r / q_;
  const double h = fine_.spacing();
  GreenField gf;
  if (!coarse_ || radius <= s_ * (1.0 + 1e-12)) {
    if (!box_holds(fine_, x0_, radius))
      throw GeometryError("Green ball B_{2r/q}(x0) must lie inside the grid box");
    gf = GreenSolver(fine_, Ball{x0_, radius}, coeffs_, opts_.rel_tol).solve(x0_, 2.0 * h);
  } else {
    if (!box_holds(fine_, x0_, s_))
      throw GeometryError("common ball B_2r(x0) must lie inside the grid box");
    const GreenField coarse =
        GreenSolver(*coarse_, Ball{x0_, radius}, coeffs_, opts_.rel_tol).solve(x0_, 2.0 * coarse_h_);
    if (!common_)
      common_ = std::make_unique<GreenSolver>(fine_, Ball{x0_, s_}, coeffs_, opts_.rel_tol);
    Field outer(fine_, 0.0);
    for (auto i : common_->stiffness().space->nodes())
      outer.values[i] = interpolate(coarse.values, fine_.coords(i));
    gf = common_->solve_with_boundary(x0_, 2.0 * h, outer);
    residual_ = std::max(residual_, coarse.residual);
  }
  residual_ = std::max(residual_, gf.residual);
  return cache_.emplace(r, std::move(gf.values)).first->second;
}

LocalEnergy local_energy_V(const Field& u, const Point& x0, double r, const Measure& mu,
                           GreenWeights& weights) {
  const Grid& g = u.grid;
  const double h = g.spacing();
  const Field& G = weights.at(r);
  const auto ke = laplacian_element(g);
  const double near = 2.0 * h * (1.0 + 1e-9);
  LocalEnergy e;

  const NodeSet ball = mask(g, Ball{x0, r});
  for (auto i : ball) e.sup_u2 = std::max(e.sup_u2, u.values[i] * u.values[i]);

  const int nc = g.corners_per_cell();
  for (auto c : cells_in_ball(g, Ball{x0, r})) {
    const double ec = cell_energy(g, ke, u, c);
    if (distance(g.cell_center(c), x0) <= near) {
      e.excluded += ec;
      continue;
    }
    const auto corners = g.cell_corners(c);
    double gc = 0.0;
    for (int a = 0; a < nc; ++a) gc += G.values[corners[std::size_t(a)]];
    e.grad_term += ec * gc / double(nc);
  }

  if (is_obstacle(mu)) {
    e.mu_term = obstacle_violated(u, ball, mu) ? kInf : 0.0;
  } else if (!is_zero(mu)) {
    const auto m = lumped_node_mass(g, mu);
    for (auto i : ball) {
      if (distance(g.coords(i), x0) <= near) continue;
      e.mu_term += m[i] * u.values[i] * u.values[i] * G.values[i];
    }
  }
  e.value = e.sup_u2 + e.grad_term + e.mu_term;
  return e;
}

LocalEnergy local_energy_V(const Field& u, const Point& x0, double r, const Measure& mu,
                           const EllipticCoefficients& coeffs, double q, double rel_tol) {
  GreenWeights w(u.grid, x0, q, r, coeffs, GreenWeightOptions{rel_tol, 0.0});
  return local_energy_V(u, x0, r, mu, w);
}

double mu_energy(const Field& u, const Point& x0, double r, const Measure& mu) {
  const Grid& g = u.grid;
  const auto ke = laplacian_element(g);
  double e = 0.0;
  for (auto c : cells_in_ball(g, Ball{x0, r})) e += cell_energy(g, ke, u, c);
  const NodeSet ball = mask(g, Ball{x0, r});
  if (is_obstacle(mu)) {
    if (obstacle_violated(u, ball, mu)) return kInf;
  } else if (!is_zero(mu)) {
    const auto m = lumped_node_mass(g, mu);
    for (auto i : ball) e += m[i] * u.values[i] * u.values[i];
  }
  return e;
}

EnergyProfile energy_profile(const Field& u, const Point& x0, std::span<const double> radii,
                             const Measure& mu, const SignedDensity& nu,
                             const EllipticCoefficients& coeffs, double q, double rel_tol,
                             GreenWeightOptions gopts) {
  if (radii.empty()) throw GeometryError("need at least one radius");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] < radii[k - 1])) throw GeometryError("radii must decrease");
  gopts.rel_tol = rel_tol;
  GreenWeights w(u.grid, x0, q, radii[0], coeffs, gopts);
  EnergyProfile p;
  p.x0 = x0;
  p.q = q;
  p.radii.assign(radii.begin(), radii.end());
  for (double r : radii) {
    const LocalEnergy v = local_energy_V(u, x0, r, mu, w);
    p.V.push_back(v.value);
    p.sup_u2.push_back(v.sup_u2);
    p.excluded.push_back(v.excluded);
    p.E_mu.push_back(mu_energy(u, x0, r, mu));
    p.kato.push_back(kato_on(nu, x0, r, u.grid.dim()));
  }
  p.coarse_green_h = w.coarse_spacing();
  for (std::size_t k = 1; k < p.V.size(); ++k)
    if (p.V[k] > p.V[k - 1] * (1.0 + 5.0 * rel_tol)) p.monotone = false;
  return p;
}

EstimateFit fit_estimate(std::span<const double> radii, std::span<const PairTerms> pairs,
                         double k_cap) {
  EstimateFit fit;
  auto training = [](const PairTerms& t) { return t.j % 2 == 0; };
  auto bound = [](const PairTerms& t, double beta) { return std::pow(t.omega, beta) * t.a + t.b; };

  int chosen = -1;
  for (int b = 1; b <= 20; ++b) {
    const double beta = 0.1 * b;
    double k = 0.0;
    for (const auto& t : pairs) k = std::max(k, ratio(t.lhs, bound(t, beta)));
    fit.k_by_beta.push_back(k);
    if (!(k <= k_cap)) continue;
    fit.beta_max = beta;
    if (chosen < 0 || k < fit.k_by_beta[std::size_t(chosen)]) chosen = b - 1;
  }

  fit.found = chosen >= 0;
  const std::size_t pick = fit.found ? std::size_t(chosen) : 0;
  fit.beta = 0.1 * double(pick + 1);
  fit.k = fit.k_by_beta[pick];
  for (const auto& t : pairs)
    if (training(t)) fit.k_train = std::max(fit.k_train, ratio(t.lhs, bound(t, fit.beta)));
  for (const auto& t : pairs) {
    FitRow row;
    row.r = radii[t.i];
    row.R = radii[t.j];
    row.lhs = t.lhs;
    row.rhs = fit.k * bound(t, fit.beta);
    row.training = training(t);
    row.pass = t.lhs <= row.rhs * (1.0 + 1e-12);
    fit.max_ratio = std::max(fit.max_ratio, ratio(row.lhs, row.rhs));
    if (!row.training)
      fit.generalization =
          std::max(fit.generalization, ratio(t.lhs, fit.k_train * bound(t, fit.beta)));
    fit.rows.push_back(row);
  }
  return fit;
}

EstimateFit verify_theorem_3_1(const EnergyProfile& e, const WienerProfile& wiener,
                               double k_cap) {
  std::vector<PairTerms> pairs;
  for (std::size_t i = 1; i < e.radii.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      PairTerms t;
      t.i = i;
      t.j = j;
      t.lhs = e.V[i];
      t.a = e.V[j];
      t.b = e.kato[j] * e.kato[j];
      t.omega = wiener_modulus(wiener, e.radii[i], e.radii[j]);
      pairs.push_back(t);
    }
  }
  return fit_estimate(e.radii, pairs, k_cap);
}

DecayReport verify_theorem_3_2(const Field& u, const EnergyProfile& e,
                               const WienerProfile& wiener, Verdict verdict,
                               const MuEnergyInputs& inputs, double k_cap) {
  DecayReport rep;
  if (verdict != Verdict::wiener_point) {
    rep.refused = true;
    rep.reason = std::string("point classified as ") + to_string(verdict);
    return rep;
  }
  const std::size_t n = e.radii.size();
  if (inputs.E_2R.size() != n || inputs.cap_2R4R.size() != n || inputs.kato_2R.size() != n)
    throw Error("mu-energy inputs do not match the profile radii");
  for (double rho : e.radii) {
    const Oscillation o = local_oscillation(u, e.x0, rho);
    rep.rho.push_back(rho);
    rep.osc.push_back(o.osc);
    rep.mean_abs.push_back(o.mean_abs);
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (rep.osc[k] > rep.osc[k - 1]) rep.osc_decreasing = false;
    if (!(e.V[k] < e.V[k - 1])) rep.v_strictly_decreasing = false;
  }
  rep.osc_ratio = ratio(rep.osc.back(), rep.osc.front());
  rep.mean_ratio = ratio(rep.mean_abs.back(), rep.mean_abs.front());

  const double dim = double(u.grid.dim());
  std::vector<PairTerms> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = std::pow(e.radii[i], dim - 2.0);
    for (std::size_t j = 0; j <= i; ++j) {
      if (std::isnan(inputs.E_2R[j])) continue;
      PairTerms t;
      t.i = i;
      t.j = j;
      t.lhs = e.E_mu[i];
      t.a = scale * ratio(inputs.E_2R[j], inputs.cap_2R4R[j]);
      t.b = scale * inputs.kato_2R[j];
      t.omega = i == j ? 1.0 : wiener_modulus(wiener, e.radii[i], e.radii[j]);
      pairs.push_back(t);
    }
  }
  rep.energy_fit = fit_estimate(e.radii, pairs, k_cap);
  return rep;
}

MuEnergyInputs mu_energy_inputs(const Field& u, const Point& x0, std::span<const double> radii,
                                const Measure& mu, const SignedDensity& nu,
                                const EllipticCoefficients& coeffs, double rel_tol) {
  const Grid& g = u.grid;
  MuEnergyInputs in;
  for (double R : radii) {
    if (!box_holds(g, x0, 4.0 * R)) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      in.E_2R.push_back(nan);
      in.cap_2R4R.push_back(nan);
      in.kato_2R.push_back(nan);
      continue;
    }
    in.E_2R.push_back(mu_energy(u, x0, 2.0 * R, mu));
    const CapacitySolver solver(mask(g, Ball{x0, 4.0 * R}), coeffs,
                                CapacityOptions{rel_tol, MassScheme::lumped});
    in.cap_2R4R.push_back(solver.mu(mask(g, Ball{x0, 2.0 * R}), mu).value);
    in.kato_2R.push_back(kato_on(nu, x0, 2.0 * R, g.dim()));
  }
  return in;
}

double integration_lemma_bound(double k, double q, double integral, double v_R) {
  if (!(q > 0.0 && q < 1.0)) throw Error("q must lie in (0, 1)");
  if (!(k > 0.0)) throw Error("k must be positive");
  const double beta = k / (1.0 + k);
  return std::exp(beta) * std::exp(-beta * integral / std::abs(std::log(q))) * v_R;
}

IntegrationBound integration_lemma(std::span<const double> v, std::span<const double> delta,
                                   double q, double k, double R) {
  if (!(q > 0.0 && q < 1.0)) throw Error("q must lie in (0, 1)");
  if (!(k > 0.0)) throw Error("k must be positive");
  if (v.empty() || delta.size() + 1 < v.size()) throw Error("need one delta per interval");
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    if (delta[j] < 0.0) throw Error("delta must be nonnegative");
    if (v[j + 1] > v[j] / (1.0 + k * delta[j]) * (1.0 + 1e-12)) throw Error("hypothesis violated");
  }
  IntegrationBound out;
  out.beta = k / (1.0 + k);
  out.k0 = std::exp(out.beta);
  const double lq = std::abs(std::log(q));
  double sum = 0.0, prod = 1.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out.rho.push_back(R * std::pow(q, double(j)));
    // integral over (rho_j, R] of delta drho / rho with delta_i on each interval
    out.bound.push_back(integration_lemma_bound(k, q, sum * lq, v[0]));
    out.recursion.push_back(v[0] * prod);
    const double slack = 1.0 + 1e-12;
    if (v[j] > out.bound[j] * slack || out.recursion[j] > out.bound[j] * slack) out.dominated = false;
    if (j < delta.size()) {
      sum += delta[j];
      prod /= 1.0 + k * delta[j];
    }
  }
  return out;
}

LemmaReport verify_lemmas_3_1_3_2(const Field& u, const Point& x0, double R, double q_lemma,
                                  const Measure& mu, const SignedDensity& nu,
                                  GreenWeights& weights) {
  if (!(q_lemma > 0.0 && q_lemma < 1.0)) throw Error("q must lie in (0, 1)");
  const Grid& g = u.grid;
  LemmaReport rep;
  for (auto i : mask(g, Ball{x0, q_lemma * R})) rep.sup_u = std::max(rep.sup_u, std::abs(u.values[i]));
  const double inner = q_lemma * R * (1.0 + 1e-12);
  double l2 = 0.0;
  for (auto c : cells_in_ball(g, Ball{x0, R}))
    if (distance(g.cell_center(c), x0) > inner) l2 += cell_l2(g, u, c);
  rep.annulus_mean = l2 / std::pow(R, double(g.dim()));
  rep.kato = kato_on(nu, x0, R, g.dim());
  rep.v_qR = local_energy_V(u, x0, q_lemma * R, mu, weights).value;
  rep.k_sup = ratio(rep.sup_u, std::sqrt(rep.annulus_mean) + rep.kato);
  rep.k_energy = ratio(rep.v_qR, rep.annulus_mean + rep.kato * rep.kato);
  rep.degenerate = rep.sup_u == 0.0 && rep.annulus_mean + rep.kato == 0.0;
  return rep;
}

}  // namespace rdp
