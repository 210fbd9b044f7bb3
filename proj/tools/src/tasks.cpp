#include "tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rdp/capacity.hpp"
#include "rdp/energy.hpp"
#include "rdp/error.hpp"
#include "rdp/green.hpp"
#include "rdp/relaxed.hpp"
#include "rdp/wiener.hpp"

namespace rdplab::detail {

using namespace rdp;

rdp::Grid TaskContext::grid(double f) const {
  std::vector<std::string> warnings;
  Grid g = Grid::build(c.dim, c.box, c.h / (f * opts.refine), &warnings);
  for (auto& w : warnings) rep.warnings.push_back(w);
  return g;
}

void TaskContext::csv(const std::string& file, const Csv& table) const {
  table.write(dir / file);
  rep.files.push_back(file);
}

void TaskContext::svg(const std::string& file, const std::string& text) const {
  write_text(dir / file, text);
  rep.files.push_back(file);
}

bool box_holds(const Grid& g, const Point& x0, double radius) {
  const double tol = 1e-9 * g.spacing();
  for (int d = 0; d < g.dim(); ++d) {
    const auto du = std::size_t(d);
    if (x0[du] - radius < g.lower()[du] - tol || x0[du] + radius > g.upper()[du] + tol) return false;
  }
  return true;
}

void require_box(const Grid& g, const Point& x0, double radius, const std::string& key,
                 const std::string& what) {
  if (!box_holds(g, x0, radius)) throw ConfigError(key, what + " must lie inside the grid box");
}

double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * (1.0 / 9007199254740992.0); }

namespace {

std::string at(const std::string& name, std::size_t i) { return name + "@" + std::to_string(i); }

struct Checks {
  RunReport& rep;
  bool failed = false;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    failed = true;
    if (!rep.message.empty()) rep.message += "; ";
    rep.message += what;
  }
};

EllipticCoefficients coefficients(const TaskContext& t) {
  const Node root = t.root();
  return root.has("coefficients") ? build_coefficients(t.c.dim, root.at("coefficients"))
                                  : EllipticCoefficients::laplacian(t.c.dim);
}

Measure measure(const TaskContext& t, const Grid& g) {
  const Node root = t.root();
  return root.has("mu") ? build_measure(g, root.at("mu")) : Measure{ZeroMeasure{}};
}

SignedDensity source(const TaskContext& t, const Grid& g) {
  const Node root = t.root();
  return root.has("nu") ? SignedDensity{build_function(g, root.at("nu"))} : SignedDensity{};
}

Field boundary_data(const TaskContext& t, const Grid& g) {
  const Node root = t.root();
  return root.has("g") ? build_function(g, root.at("g")) : Field(g, 0.0);
}

Verdict parse_verdict(const Node& n, const std::string& key) {
  const std::string v = n.string(key);
  if (v == "wiener_point") return Verdict::wiener_point;
  if (v == "not_wiener_point") return Verdict::not_wiener_point;
  if (v == "inconclusive") return Verdict::inconclusive;
  throw ConfigError(n.key_path(key), "expected wiener_point, not_wiener_point or inconclusive");
}

// Remark 2.1 bounds on one profile, with omega recomputed from the raw deltas.
struct ProfileBounds {
  double delta_min = INFINITY, delta_max = -INFINITY;
  double omega_ratio_min = INFINITY;  // min omega_raw(r, R) / (r / R)
  double omega_max = 0.0;
};

void profile_bounds(const WienerProfile& p, ProfileBounds& b) {
  for (double d : p.delta_raw) {
    b.delta_min = std::min(b.delta_min, d);
    b.delta_max = std::max(b.delta_max, d);
  }
  WienerProfile raw = profile_from_delta(p.x0, p.R, p.q_w, p.delta_raw);
  raw.rho = p.rho;
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double om = wiener_modulus(raw, p.rho[i], p.rho[j]);
      b.omega_ratio_min = std::min(b.omega_ratio_min, om / (p.rho[i] / p.rho[j]));
      b.omega_max = std::max(b.omega_max, om);
    }
  }
}

void report_bounds(TaskContext& t, Checks& chk, const ProfileBounds& b) {
  const double slack = 5.0 * t.rel_tol();
  t.rep.metric("delta_raw_min", b.delta_min);
  t.rep.metric("delta_raw_max", b.delta_max);
  t.rep.metric("omega_ratio_min", b.omega_ratio_min);
  t.rep.metric("omega_max", b.omega_max);
  chk.expect(b.delta_min >= -slack && b.delta_max <= 1.0 + slack, "delta outside [0, 1] beyond 5 rel_tol");
  chk.expect(b.omega_ratio_min >= 1.0 - 1e-12 && b.omega_max <= 1.0 + slack,
             "omega outside [r/R, 1] beyond 5 rel_tol");
}

Csv profile_csv(const WienerProfile& p) {
  Csv csv({"level", "rho", "cap_mu", "cap", "delta_raw", "delta", "integral", "omega"});
  for (std::size_t k = 0; k < p.rho.size(); ++k)
    csv.row({std::to_string(k), fmt(p.rho[k]), fmt(p.cap_mu[k]), fmt(p.cap[k]), fmt(p.delta_raw[k]),
             fmt(p.delta[k]), fmt(p.integral[k]), fmt(p.omega[k])});
  return csv;
}

WienerOptions wiener_options(const TaskContext& t) {
  const Node root = t.root();
  WienerOptions o;
  o.q_w = root.positive("q_w", 0.5);
  if (!(o.q_w < 1.0)) throw ConfigError("q_w", "must lie in (0, 1)");
  o.rel_tol = t.rel_tol();
  o.min_rho_cells = root.positive("min_rho_cells", 4.0);
  o.laplacian_denominator = root.boolean("laplacian_denominator", false);
  o.mass = build_mass(root);
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------

void capacity_sweep(TaskContext& t) {
  const Node root = t.root();
  const int dim = t.c.dim;
  const Point x0 = root.point("x0", dim);
  const auto radii = root.numbers("radii");
  if (radii.empty()) throw ConfigError("radii", "needs at least one radius");
  const double ratio = root.positive("outer_ratio", 2.0);
  if (!(ratio > 1.0)) throw ConfigError("outer_ratio", "must exceed 1");
  const auto coeffs = coefficients(t);
  const CapacityOptions copts{t.rel_tol(), build_mass(root)};

  bool analytic = false;
  double tol = INFINITY, conv = INFINITY, homog = INFINITY;
  if (root.has("expected")) {
    const Node e = root.at("expected");
    analytic = e.boolean("analytic", false);
    tol = e.positive("tolerance", INFINITY);
    conv = e.positive("convergence_ratio", INFINITY);
    homog = e.positive("homogeneity_tolerance", INFINITY);
    if (analytic && !coeffs.is_laplacian())
      throw ConfigError("expected.analytic", "the analytic value needs laplacian coefficients");
  }

  std::vector<Grid> grids;
  for (double f : t.c.refine) {
    grids.push_back(t.grid(f));
    for (double r : radii) {
      require_box(grids.back(), x0, ratio * r, "radii", "every outer ball");
      if (r < 2.0 * grids.back().spacing()) throw ConfigError("radii", "radii must span at least 2h");
    }
  }

  auto exact = [&](double r) {
    return dim == 2 ? 2.0 * std::numbers::pi / std::log(ratio)
                    : 4.0 * std::numbers::pi * r * ratio / (ratio - 1.0);
  };
  Checks chk{t.rep};
  Csv csv({"refine", "h", "rho", "cap", "cap_mu", "delta_raw", "residual", "iterations", "analytic",
           "rel_error"});
  std::vector<std::vector<double>> caps(grids.size()), errs(grids.size());
  ProfileBounds bounds;
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const Grid& g = grids[gi];
    const Measure mu = measure(t, g);
    double worst = 0.0;
    for (double r : radii) {
      const CapacitySolver solver(mask(g, Ball{x0, ratio * r}), coeffs, copts);
      const NodeSet e = mask(g, Ball{x0, r});
      const CapacityReport cap = solver.harmonic(e);
      const double cap_mu = is_zero(mu) ? 0.0 : solver.mu(e, mu).value;
      const double d = cap.value > 0.0 ? cap_mu / cap.value : 0.0;
      bounds.delta_min = std::min(bounds.delta_min, d);
      bounds.delta_max = std::max(bounds.delta_max, d);
      const double ref = analytic ? exact(r) : NAN;
      const double err = analytic ? (cap.value - ref) / ref : NAN;
      caps[gi].push_back(cap.value);
      errs[gi].push_back(err);
      if (analytic) worst = std::max(worst, std::abs(err));
      csv.row({fmt(t.c.refine[gi]), fmt(g.spacing()), fmt(r), fmt(cap.value), fmt(cap_mu), fmt(d),
               fmt(cap.residual), std::to_string(cap.iterations), fmt(ref), fmt(err)});
      for (auto& w : cap.warnings) t.rep.warnings.push_back(w);
    }
    t.rep.metric(at("h", gi), g.spacing());
    if (analytic) {
      t.rep.metric(at("rel_error_max", gi), worst);
      chk.expect(worst <= tol, "capacity off the analytic value by more than the tolerance");
    }
  }
  t.csv("capacity.csv", csv);

  if (analytic && grids.size() >= 2) {
    double worst = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k)
      worst = std::max(worst, std::abs(errs[1][k]) / std::abs(errs[0][k]));
    t.rep.metric("convergence_ratio", worst);
    chk.expect(worst <= conv, "error did not shrink enough under refinement");
  }
  double hdev = 0.0;
  bool have_pair = false;
  for (std::size_t gi = 0; gi < grids.size(); ++gi)
    for (std::size_t a = 0; a < radii.size(); ++a)
      for (std::size_t b = 0; b < radii.size(); ++b)
        if (std::abs(radii[b] - 2.0 * radii[a]) <= 1e-12 * radii[b]) {
          have_pair = true;
          hdev = std::max(hdev, std::abs(caps[gi][b] / caps[gi][a] / std::pow(2.0, dim - 2) - 1.0));
        }
  if (have_pair) {
    t.rep.metric("homogeneity_dev_max", hdev);
    chk.expect(hdev <= homog, "capacity ratio for doubled radii off 2^(N-2)");
  } else if (std::isfinite(homog)) {
    throw ConfigError("expected.homogeneity_tolerance", "needs radii rho and 2 rho");
  }
  const double slack = 5.0 * t.rel_tol();
  if (!is_zero(measure(t, grids[0]))) {
    t.rep.metric("delta_raw_min", bounds.delta_min);
    t.rep.metric("delta_raw_max", bounds.delta_max);
    chk.expect(bounds.delta_min >= -slack && bounds.delta_max <= 1.0 + slack,
               "delta outside [0, 1] beyond 5 rel_tol");
  }
  t.rep.status = chk.failed ? Status::fail : Status::pass;
}

// ---------------------------------------------------------------------------

void green_check(TaskContext& t) {
  const Node root = t.root();
  const int dim = t.c.dim;
  const Point y = root.point("x0", dim);
  const double R0 = root.positive("R0");
  std::vector<double> fractions{0.125, 0.25, 0.5};
  if (root.has("fractions")) fractions = root.numbers("fractions");
  const double q = root.positive("q", 0.5);
  if (!(q < 1.0)) throw ConfigError("q", "must lie in (0, 1)");
  for (double f : fractions)
    if (!(f > 0.0 && f / q <= 1.0 + 1e-12)) throw ConfigError("fractions", "need 0 < r/R0 <= q");
  const double rho_cfg = root.number("rho", -1.0);
  const int samples = root.integer("samples", 10);
  const auto seed = std::uint64_t(root.integer("seed", 2024));
  Point y2 = y;
  y2[0] += 0.25 * R0;
  if (root.has("second_point")) y2 = root.point("second_point", dim);
  if (distance(y2, y) >= R0) throw ConfigError("second_point", "must lie inside the Green ball");
  const auto coeffs = coefficients(t);

  double k_lo = 0.0, k_hi = INFINITY, change_tol = INFINITY, sym_tol = 5.0, norm_tol = 2.0;
  if (root.has("expected")) {
    const Node e = root.at("expected");
    if (e.has("k_range")) {
      const auto r = e.numbers("k_range");
      if (r.size() != 2 || !(r[1] >= r[0])) throw ConfigError("expected.k_range", "expected [lo, hi]");
      k_lo = r[0];
      k_hi = r[1];
    }
    change_tol = e.positive("refine_change", INFINITY);
    sym_tol = e.positive("symmetry_tol", sym_tol);
    norm_tol = e.positive("normalization_tol", norm_tol);
  }
  std::vector<Grid> grids;
  for (double f : t.c.refine) {
    grids.push_back(t.grid(f));
    require_box(grids.back(), y, R0, "R0", "the Green ball B_R0(x0)");
  }

  Checks chk{t.rep};
  const double tol = t.rel_tol();
  Csv rows({"refine", "h", "r", "capacity", "g_min", "g_max", "shell_nodes", "k_lower", "k_upper", "k"});
  Csv summary({"refine", "h", "K", "alpha", "symmetry_error", "normalization_error", "residual"});
  std::vector<double> ks;
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const Grid& g = grids[gi];
    const GreenSolver solver(g, Ball{y, R0}, coeffs, tol);
    const double rho = rho_cfg < 0.0 ? 2.0 * g.spacing() : rho_cfg;
    const GreenField g1 = solver.solve(y, rho);
    const GreenField g2 = solver.solve(y2, rho);
    for (auto& w : g1.warnings) t.rep.warnings.push_back(w);
    std::vector<double> radii;
    for (double f : fractions) radii.push_back(f * R0);
    const GreenBoundReport b = check_green_bounds(g1, coeffs, q, radii, tol);

    const double s12 = ball_average(g1.values, y2, rho), s21 = ball_average(g2.values, y, rho);
    const double sym = std::abs(s12 - s21) / std::max(std::abs(s12), std::abs(s21));

    std::mt19937_64 rng(seed);
    const FemSpace& sp = *g1.stiffness->space;
    double nerr = 0.0;
    for (int s = 0; s < samples; ++s) {
      Field v(g, 0.0);
      for (std::size_t l = 0; l < sp.size(); ++l)
        if (sp.is_free_local(l)) v.values[sp.nodes()[l]] = unit_uniform(rng);
      const double lhs = bilinear(*g1.stiffness, v, g1.values);
      const double avg = ball_average(v, y, rho);
      nerr = std::max(nerr, std::abs(lhs - avg) / std::abs(avg));
    }
    for (const auto& r : b.rows) {
      rows.row({fmt(t.c.refine[gi]), fmt(g.spacing()), fmt(r.r), fmt(r.capacity), fmt(r.g_min), fmt(r.g_max),
                std::to_string(r.shell_nodes), fmt(r.k_lower), fmt(r.k_upper), fmt(r.k)});
      chk.expect(r.k >= k_lo && r.k <= k_hi, "Green bound constant K outside the expected range");
    }
    summary.row({fmt(t.c.refine[gi]), fmt(g.spacing()), fmt(b.k), fmt(b.alpha), fmt(sym), fmt(nerr),
                 fmt(std::max(g1.residual, g2.residual))});
    t.rep.metric(at("h", gi), g.spacing());
    t.rep.metric(at("K", gi), b.k);
    t.rep.metric(at("alpha", gi), b.alpha);
    t.rep.metric(at("symmetry_error", gi), sym);
    t.rep.metric(at("normalization_error", gi), nerr);
    chk.expect(b.consistent, "no finite (K, alpha) covers the family");
    chk.expect(sym <= sym_tol * tol, "Green function not symmetric within tolerance");
    chk.expect(nerr <= norm_tol * tol, "normalization a(v, G) = average of v violated");
    ks.push_back(b.k);
  }
  t.csv("green_bounds.csv", rows);
  t.csv("green_summary.csv", summary);
  if (ks.size() >= 2) {
    const double change = std::abs(ks[1] - ks[0]) / ks[0];
    t.rep.metric("K_refine_change", change);
    chk.expect(change <= change_tol, "K changed too much under refinement");
  }
  t.rep.status = chk.failed ? Status::fail : Status::pass;
}

// ---------------------------------------------------------------------------

void wiener_classify(TaskContext& t) {
  const Node root = t.root();
  const int dim = t.c.dim;
  const Point x0 = root.point("x0", dim);
  const double R = root.positive("R");
  const int levels = root.integer("levels", 5);
  if (levels < 2) throw ConfigError("levels", "needs at least 2 levels");
  const WienerOptions wo = wiener_options(t);
  const auto coeffs = coefficients(t);
  const bool boundary = root.has("boundary");
  std::optional<Verdict> expected;
  if (root.has("expected") && root.at("expected").has("verdict"))
    expected = parse_verdict(root.at("expected"), "verdict");

  const double f0 = t.c.refine.front();
  const Grid coarse = t.grid(f0), fine = t.grid(2.0 * f0);
  require_box(coarse, x0, 2.0 * R, "R", "B_2R(x0)");
  if (boundary) {
    const Node b = root.at("boundary");
    (void)b.at("inner");
    (void)b.at("outer");
  }

  Checks chk{t.rep};
  ProfileBounds bounds;
  std::vector<WienerProfile> profiles;
  std::vector<std::string> svg_names;
  double gap = 0.0;
  bool identity = true;
  for (const Grid* g : {&coarse, &fine}) {
    WienerProfile p;
    if (boundary) {
      const Node b = root.at("boundary");
      const NodeSet inner = build_set(*g, b.at("inner"));
      const NodeSet outer = build_set(*g, b.at("outer"));
      const BoundaryWienerProfile bw = boundary_wiener_modulus(inner, outer, x0, R, levels, coeffs, wo);
      for (double v : bw.gap) gap = std::max(gap, v);
      identity = identity && bw.identity_holds;
      p = bw.relaxed;
      profile_bounds(bw.classical, bounds);
    } else {
      p = delta_profile(*g, x0, R, levels, measure(t, *g), coeffs, wo);
    }
    for (auto& w : p.warnings) t.rep.warnings.push_back(w);
    profile_bounds(p, bounds);
    chk.expect(!p.clamp_violation, "delta left [0, 1] by more than 5 rel_tol");
    t.csv("profile_" + std::to_string(profiles.size()) + ".csv", profile_csv(p));
    profiles.push_back(std::move(p));
  }
  const Classification cl = classify_point(profiles[0], profiles[1]);
  t.rep.metric("verdict", to_string(cl.verdict));
  t.rep.metric("slope_coarse", cl.slope_coarse);
  t.rep.metric("slope_fine", cl.slope_fine);
  t.rep.metric("rel_drift", cl.rel_drift);
  t.rep.metric("abs_drift", cl.abs_drift);
  t.rep.metric("levels", double(profiles[1].rho.size()));
  report_bounds(t, chk, bounds);
  if (boundary) {
    t.rep.metric("identity_gap_max", gap);
    chk.expect(identity, "classical and relaxed capacities differ by more than 5 rel_tol");
  }
  if (t.opts.plots) {
    std::vector<Series> s;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      s.push_back({"delta@" + std::to_string(i), profiles[i].rho, profiles[i].delta});
      s.push_back({"omega@" + std::to_string(i), profiles[i].rho, profiles[i].omega});
    }
    t.svg("delta_omega.svg", svg_loglog(t.c.name + ": delta and omega", "rho", s));
  }
  if (!t.rep.message.empty()) t.rep.message += "; ";
  t.rep.message += std::string(to_string(cl.verdict)) + " (" + cl.reason + ")";
  if (chk.failed) {
    t.rep.status = Status::fail;
  } else if (expected) {
    t.rep.status = *expected == cl.verdict ? Status::pass : Status::fail;
  } else {
    t.rep.status = cl.verdict == Verdict::inconclusive ? Status::inconclusive : Status::pass;
  }
}

// ---------------------------------------------------------------------------

void relaxed_solve(TaskContext& t) {
  const Node root = t.root();
  const auto coeffs = coefficients(t);
  const MassScheme mass = build_mass(root);
  int count = 20;
  std::uint64_t seed = 12345;
  if (root.has("minimality")) {
    const Node m = root.at("minimality");
    count = m.integer("count", count);
    seed = std::uint64_t(m.integer("seed", int(seed)));
  }
  const bool equivalence = root.has("equivalence");
  double eq_tol = 1e-10, cap_tol = 5.0;
  if (root.has("expected")) {
    const Node e = root.at("expected");
    eq_tol = e.positive("equivalence_tol", eq_tol);
    cap_tol = e.positive("capacity_tol", cap_tol);
  }
  const bool write_field = root.boolean("write_field", false) || t.opts.plots;

  std::vector<Grid> grids;
  for (double f : t.c.refine) grids.push_back(t.grid(f));
  if (equivalence) {
    const Node e = root.at("equivalence");
    (void)e.at("inner");
    if (e.has("x0")) require_box(grids[0], e.point("x0", t.c.dim), 2.0 * e.positive("R"), "equivalence.R",
                                 "B_2R(x0)");
    if (root.has("mu")) throw ConfigError("mu", "the equivalence check sets mu itself; drop this key");
  }

  Checks chk{t.rep};
  const double tol = t.rel_tol();
  Csv csv({"refine", "h", "residual", "iterations", "energy", "mu_term", "functional", "min_gap",
           "equivalence_diff", "capacity_gap_max"});
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const Grid& g = grids[gi];
    RelaxedProblem p;
    p.domain = build_set(g, root.at("domain"));
    p.coeffs = coeffs;
    p.mass = mass;
    p.nu = source(t, g);
    p.g = boundary_data(t, g);
    NodeSet inner;
    if (equivalence) {
      inner = set_intersection(build_set(g, root.at("equivalence").at("inner")), p.domain);
      p.mu = ObstacleMeasure{complement_obstacle(p.domain, inner)};
    } else {
      p.mu = measure(t, g);
    }
    const Solution s = solve_relaxed(p, tol);
    for (auto& w : s.warnings) t.rep.warnings.push_back(w);
    const MinimalityReport mr = minimize_functional_check(s, std::size_t(count), seed);
    chk.expect(mr.pass, "a random admissible perturbation lowered the functional");

    double diff = NAN, gap = NAN;
    if (equivalence) {
      RelaxedProblem cl = p;
      cl.domain = inner;
      cl.mu = ZeroMeasure{};
      const Solution sc = solve_relaxed(cl, tol);
      diff = 0.0;
      for (std::size_t i = 0; i < g.node_count(); ++i)
        diff = std::max(diff, std::abs(s.u.values[i] - sc.u.values[i]));
      chk.expect(diff <= eq_tol, "relaxed and classical solutions differ");
      const Node e = root.at("equivalence");
      if (e.has("x0")) {
        WienerOptions wo;
        wo.rel_tol = tol;
        wo.min_rho_cells = e.positive("min_rho_cells", 4.0);
        const BoundaryWienerProfile bw = boundary_wiener_modulus(
            inner, p.domain, e.point("x0", t.c.dim), e.positive("R"), e.integer("levels", 3), coeffs, wo);
        gap = 0.0;
        for (double v : bw.gap) gap = std::max(gap, v);
        chk.expect(gap <= cap_tol * tol, "Cap over the complement obstacle differs from the classical capacity");
      }
      t.rep.metric(at("equivalence_diff", gi), diff);
      if (!std::isnan(gap)) t.rep.metric(at("capacity_gap_max", gi), gap);
    }
    csv.row({fmt(t.c.refine[gi]), fmt(g.spacing()), fmt(s.residual), std::to_string(s.iterations),
             fmt(s.energy), fmt(s.mu_term), fmt(s.functional), fmt(mr.min_gap), fmt(diff), fmt(gap)});
    t.rep.metric(at("h", gi), g.spacing());
    t.rep.metric(at("functional", gi), s.functional);
    t.rep.metric(at("min_gap", gi), mr.min_gap);
    if (write_field) {
      Csv f({"node", "x", "y", "z", "u"});
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        const Point x = g.coords(i);
        f.row({std::to_string(i), fmt(x[0]), fmt(x[1]), fmt(x[2]), fmt(s.u.values[i])});
      }
      t.csv("field_" + std::to_string(gi) + ".csv", f);
    }
    if (t.opts.plots) {
      const auto [lo, hi] = std::minmax_element(s.u.values.begin(), s.u.values.end());
      t.svg("field_" + std::to_string(gi) + ".svg", svg_heatmap(t.c.name + ": u", s.u, *lo, *hi));
    }
  }
  t.csv("relaxed.csv", csv);
  t.rep.status = chk.failed ? Status::fail : Status::pass;
}

// ---------------------------------------------------------------------------

void energy_verify(TaskContext& t) {
  const Node root = t.root();
  const int dim = t.c.dim;
  const Point x0 = root.point("x0", dim);
  const double R = root.positive("R");
  const double R0 = root.positive("R0");
  const int levels = root.integer("levels", 5);
  if (levels < 2) throw ConfigError("levels", "needs at least 2 levels");
  const double q = root.positive("q", 0.125);
  if (!(q < 1.0)) throw ConfigError("q", "must lie in (0, 1)");
  if (!(R < R0)) throw ConfigError("R", "must be smaller than R0");
  const WienerOptions wo = wiener_options(t);
  const auto coeffs = coefficients(t);
  const double tol = t.rel_tol();

  struct Expect {
    double k_max = INFINITY, k_stability = INFINITY, osc_max = INFINITY, osc_min = -INFINITY;
    int min_levels = 0;
    bool v_decreasing = false;
    std::optional<Verdict> verdict;
  } ex;
  if (root.has("expected")) {
    const Node e = root.at("expected");
    ex.k_max = e.positive("k_max", INFINITY);
    ex.k_stability = e.positive("k_stability", INFINITY);
    ex.osc_max = e.positive("osc_ratio_max", INFINITY);
    ex.osc_min = e.number("osc_ratio_min", -INFINITY);
    ex.min_levels = e.integer("min_levels", 0);
    ex.v_decreasing = e.boolean("v_strictly_decreasing", false);
    if (e.has("verdict")) ex.verdict = parse_verdict(e, "verdict");
  }
  const double k_cap = std::isfinite(ex.k_max) ? ex.k_max : root.positive("k_cap", 1e6);
  double lemma_q = 0.0;
  if (root.has("lemma")) {
    lemma_q = root.at("lemma").positive("q", 0.5);
    if (!(lemma_q < 1.0)) throw ConfigError("lemma.q", "must lie in (0, 1)");
  }

  std::vector<double> factors = t.c.refine;
  const bool extra = factors.size() < 2;  // the classifier needs a second resolution
  if (extra) factors.push_back(2.0 * factors[0]);
  std::vector<Grid> grids;
  for (double f : factors) {
    grids.push_back(t.grid(f));
    require_box(grids.back(), x0, R0, "R0", "the solve ball B_R0(x0)");
    require_box(grids.back(), x0, 2.0 * R, "R", "B_2R(x0)");
  }

  Checks chk{t.rep};
  ProfileBounds bounds;
  std::vector<WienerProfile> profiles;
  std::vector<EstimateFit> fits;
  std::vector<Field> solutions;
  std::vector<EnergyProfile> energies;
  std::vector<std::vector<Oscillation>> oscs;
  const std::size_t runs = extra ? 1 : grids.size();
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const Grid& g = grids[gi];
    const Measure mu = measure(t, g);
    WienerProfile w = delta_profile(g, x0, R, levels, mu, coeffs, wo);
    for (auto& s : w.warnings) t.rep.warnings.push_back(s);
    profile_bounds(w, bounds);
    chk.expect(!w.clamp_violation, "delta left [0, 1] by more than 5 rel_tol");
    if (gi >= runs) {
      profiles.push_back(std::move(w));
      continue;
    }
    RelaxedProblem p;
    p.domain = root.has("domain") ? set_intersection(build_set(g, root.at("domain")), mask(g, Ball{x0, R0}))
                                  : mask(g, Ball{x0, R0});
    p.coeffs = coeffs;
    p.mu = mu;
    p.nu = source(t, g);
    p.g = boundary_data(t, g);
    p.mass = wo.mass;
    const Solution s = solve_relaxed(p, tol);
    for (auto& m : s.warnings) t.rep.warnings.push_back(m);
    const EnergyProfile e = energy_profile(s.u, x0, w.rho, mu, p.nu, coeffs, q, tol);
    const EstimateFit fit = verify_theorem_3_1(e, w, k_cap);
    std::vector<Oscillation> os;
    for (double r : e.radii) os.push_back(local_oscillation(s.u, x0, r));

    Csv csv({"r", "V", "E_mu", "sup_u2", "excluded", "kato", "delta_raw", "delta", "omega", "osc", "mean_abs"});
    for (std::size_t k = 0; k < e.radii.size(); ++k)
      csv.row({fmt(e.radii[k]), fmt(e.V[k]), fmt(e.E_mu[k]), fmt(e.sup_u2[k]), fmt(e.excluded[k]), fmt(e.kato[k]),
               fmt(w.delta_raw[k]), fmt(w.delta[k]), fmt(w.omega[k]), fmt(os[k].osc), fmt(os[k].mean_abs)});
    t.csv("energy_" + std::to_string(gi) + ".csv", csv);
    Csv rows({"r", "R", "lhs", "rhs", "training", "pass"});
    for (const auto& r : fit.rows)
      rows.row({fmt(r.r), fmt(r.R), fmt(r.lhs), fmt(r.rhs), r.training ? "1" : "0", r.pass ? "1" : "0"});
    t.csv("fit_" + std::to_string(gi) + ".csv", rows);
    Csv kb({"beta", "k"});
    for (std::size_t b = 0; b < fit.k_by_beta.size(); ++b) kb.row({fmt(0.1 * double(b + 1)), fmt(fit.k_by_beta[b])});
    t.csv("k_by_beta_" + std::to_string(gi) + ".csv", kb);

    bool strictly = true;
    for (std::size_t k = 1; k < e.V.size(); ++k) strictly = strictly && e.V[k] < e.V[k - 1];
    const double osc_ratio =
        os.front().osc > 0.0 ? os.back().osc / os.front().osc : (os.back().osc > 0.0 ? INFINITY : 0.0);
    double excluded = 0.0;
    for (double v : e.excluded) excluded = std::max(excluded, v);

    t.rep.metric(at("h", gi), g.spacing());
    t.rep.metric(at("residual", gi), s.residual);
    t.rep.metric(at("levels", gi), double(e.radii.size()));
    t.rep.metric(at("k", gi), fit.k);
    t.rep.metric(at("beta", gi), fit.beta);
    t.rep.metric(at("beta_max", gi), fit.beta_max);
    t.rep.metric(at("k_train", gi), fit.k_train);
    t.rep.metric(at("generalization", gi), fit.generalization);
    t.rep.metric(at("osc_ratio", gi), osc_ratio);
    t.rep.metric(at("v_strictly_decreasing", gi), strictly ? 1.0 : 0.0);
    t.rep.metric(at("excluded_max", gi), excluded);
    t.rep.metric(at("green_coarse_h", gi), e.coarse_green_h);

    chk.expect(fit.found, "no beta admits k <= " + fmt(k_cap));
    chk.expect(int(e.radii.size()) >= ex.min_levels, "too few radii above the resolution floor");
    if (ex.v_decreasing) chk.expect(strictly, "V is not strictly decreasing");
    chk.expect(osc_ratio <= ex.osc_max, "oscillation did not decay enough");
    chk.expect(osc_ratio >= ex.osc_min, "oscillation decayed below the irregularity floor");
    if (lemma_q > 0.0) {
      GreenWeights lw(g, x0, q, lemma_q * R, coeffs, GreenWeightOptions{tol, 0.0});
      const LemmaReport lr = verify_lemmas_3_1_3_2(s.u, x0, R, lemma_q, mu, p.nu, lw);
      t.rep.metric(at("lemma_k_sup", gi), lr.k_sup);
      t.rep.metric(at("lemma_k_energy", gi), lr.k_energy);
      t.rep.metric(at("lemma_degenerate", gi), lr.degenerate ? 1.0 : 0.0);
    }
    profiles.push_back(std::move(w));
    fits.push_back(fit);
    solutions.push_back(s.u);
    energies.push_back(e);
    oscs.push_back(std::move(os));
  }
  report_bounds(t, chk, bounds);

  const Classification cl = classify_point(profiles[0], profiles[1]);
  t.rep.metric("verdict", to_string(cl.verdict));
  if (ex.verdict) chk.expect(*ex.verdict == cl.verdict, std::string("verdict is ") + to_string(cl.verdict));

  if (fits.size() >= 2) {
    // k at the coarse run's beta on both resolutions
    const std::size_t b = std::size_t(std::lround(fits[0].beta * 10.0)) - 1;
    const double k0 = fits[0].k_by_beta[b], k1 = fits[1].k_by_beta[b];
    const double change = k0 > 0.0 ? std::abs(k1 - k0) / k0 : (k1 > 0.0 ? INFINITY : 0.0);
    t.rep.metric("k_change", change);
    chk.expect(change <= ex.k_stability, "fitted k not stable under refinement");
    if (lemma_q > 0.0) {
      const double a = *t.rep.number("lemma_k_sup@0"), c = *t.rep.number("lemma_k_sup@1");
      t.rep.metric("lemma_k_sup_change", a > 0.0 ? std::abs(c - a) / a : 0.0);
    }
  }

  if (cl.verdict == Verdict::wiener_point) {
    for (std::size_t gi = 0; gi < fits.size(); ++gi) {
      const Grid& g = grids[gi];
      const MuEnergyInputs in =
          mu_energy_inputs(solutions[gi], x0, energies[gi].radii, measure(t, g), source(t, g), coeffs, tol);
      const DecayReport d = verify_theorem_3_2(solutions[gi], energies[gi], profiles[gi], cl.verdict, in, k_cap);
      t.rep.metric(at("mu_energy_k", gi), d.energy_fit.k);
      t.rep.metric(at("mu_energy_found", gi), d.energy_fit.found ? 1.0 : 0.0);
      t.rep.metric(at("mean_ratio", gi), d.mean_ratio);
      Csv rows({"r", "R", "lhs", "rhs", "training", "pass"});
      for (const auto& r : d.energy_fit.rows)
        rows.row({fmt(r.r), fmt(r.R), fmt(r.lhs), fmt(r.rhs), r.training ? "1" : "0", r.pass ? "1" : "0"});
      t.csv("mu_energy_fit_" + std::to_string(gi) + ".csv", rows);
    }
  }

  if (t.opts.plots && !energies.empty()) {
    std::vector<Series> s;
    for (std::size_t i = 0; i < energies.size(); ++i) {
      s.push_back({"V@" + std::to_string(i), energies[i].radii, energies[i].V});
      s.push_back({"E_mu@" + std::to_string(i), energies[i].radii, energies[i].E_mu});
    }
    t.svg("energy_decay.svg", svg_loglog(t.c.name + ": V(r) and E_mu(r)", "r", s));
    std::vector<Series> d;
    for (std::size_t i = 0; i < energies.size(); ++i) {
      d.push_back({"delta@" + std::to_string(i), profiles[i].rho, profiles[i].delta});
      d.push_back({"omega@" + std::to_string(i), profiles[i].rho, profiles[i].omega});
    }
    t.svg("delta_omega.svg", svg_loglog(t.c.name + ": delta and omega", "rho", d));
  }

  bool all_zero = true;
  for (const auto& e : energies)
    for (double v : e.V) all_zero = all_zero && v == 0.0;
  if (!t.rep.message.empty()) t.rep.message += "; ";
  t.rep.message += std::string(to_string(cl.verdict));
  if (chk.failed) {
    t.rep.status = Status::fail;
  } else if (all_zero) {
    t.rep.status = Status::degenerate;
  } else if (cl.verdict == Verdict::inconclusive && !ex.verdict) {
    t.rep.status = Status::inconclusive;
  } else {
    t.rep.status = Status::pass;
  }
}

// ---------------------------------------------------------------------------

void lemma_3_4(TaskContext& t) {
  const Node root = t.root();
  const int triples = root.integer("triples", 50);
  const int levels = root.integer("levels", 8);
  const auto seed = std::uint64_t(root.integer("seed", 7));
  if (triples < 0) throw ConfigError("triples", "must be nonnegative");
  if (levels < 1) throw ConfigError("levels", "needs at least 1 level");

  Checks chk{t.rep};
  std::mt19937_64 rng(seed);
  Csv csv({"triple", "q", "k", "beta", "levels", "min_margin", "dominated"});
  double margin_all = INFINITY;
  int dominated = 0;
  for (int n = 0; n < triples; ++n) {
    const double q = 0.1 + 0.8 * unit_uniform(rng);
    const double k = 0.1 + 9.9 * unit_uniform(rng);
    std::vector<double> delta(static_cast<std::size_t>(levels), 0.0), v(static_cast<std::size_t>(levels) + 1, 0.0);
    v[0] = 1.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      delta[j] = unit_uniform(rng);
      // the hypothesis, with an extra random contraction
      v[j + 1] = v[j] / (1.0 + k * delta[j]) * (0.5 + 0.5 * unit_uniform(rng));
    }
    const IntegrationBound b = integration_lemma(v, delta, q, k);
    double margin = INFINITY;
    for (std::size_t j = 0; j < v.size(); ++j)
      margin = std::min(margin, b.bound[j] / std::max(v[j], b.recursion[j]));
    margin_all = std::min(margin_all, margin);
    dominated += b.dominated ? 1 : 0;
    csv.row({std::to_string(n), fmt(q), fmt(k), fmt(b.beta), std::to_string(levels), fmt(margin),
             b.dominated ? "1" : "0"});
  }
  t.csv("lemma_3_4.csv", csv);
  t.rep.metric("triples", double(triples));
  t.rep.metric("dominated", double(dominated));
  t.rep.metric("min_margin", margin_all);
  chk.expect(dominated == triples, "closed form fails to dominate the recursion");

  if (root.boolean("worked", true)) {
    // delta = 1, q = 1/2, k = 1
    std::vector<double> delta(6, 1.0), v(7, 1.0);
    for (std::size_t j = 0; j < delta.size(); ++j) v[j + 1] = v[j] / 2.0;
    const IntegrationBound b = integration_lemma(v, delta, 0.5, 1.0);
    Csv w({"level", "r_over_R", "bound", "reference", "rel_diff"});
    double worst = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double ref = 1.64872 * std::pow(b.rho[j], 0.72135);
      const double diff = std::abs(b.bound[j] - ref) / ref;
      worst = std::max(worst, diff);
      w.row({std::to_string(j), fmt(b.rho[j]), fmt(b.bound[j]), fmt(ref), fmt(diff)});
    }
    t.csv("lemma_3_4_worked.csv", w);
    t.rep.metric("worked_rel_diff_max", worst);
    chk.expect(worst <= 5e-5, "worked example not reproduced to 5 digits");
  }
  t.rep.status = chk.failed ? Status::fail : Status::pass;
}

}  // namespace rdplab::detail
