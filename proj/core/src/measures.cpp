#include "rdp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rdp/error.hpp"

namespace rdp {

namespace {

double cell_mean(const Field& f, const Grid& g, std::size_t cell) {
  const auto corners = g.cell_corners(cell);
  const int nc = g.corners_per_cell();
  double s = 0.0;
  for (int a = 0; a < nc; ++a) s += f.values[corners[std::size_t(a)]];
  return s / nc;
}

// Volume of the unit ball in dimension 2 or 3.
double unit_ball_volume(int dim) { return dim == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0; }

}  // namespace

Measure make_density(Field f) {
  for (double v : f.values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw MeasureError("density must be finite and >= 0");
  return DensityMeasure{std::move(f), std::nullopt};
}

bool is_zero(const Measure& mu) {
  if (std::holds_alternative<ZeroMeasure>(mu)) return true;
  if (const auto* o = std::get_if<ObstacleMeasure>(&mu)) return o->set.empty();
  const auto& d = std::get<DensityMeasure>(mu);
  if (d.support && d.support->empty()) return true;
  return std::all_of(d.density.values.begin(), d.density.values.end(),
                     [](double v) { return v == 0.0; });
}

bool is_obstacle(const Measure& mu) { return std::holds_alternative<ObstacleMeasure>(mu); }

std::string describe(const Measure& mu) {
  if (std::holds_alternative<ZeroMeasure>(mu)) return "zero";
  if (const auto* o = std::get_if<ObstacleMeasure>(&mu))
    return "obstacle(" + std::to_string(o->set.size()) + " nodes)";
  return "density";
}

Measure restrict(const Measure& mu, const NodeSet& e) {
  return std::visit(
      [&](const auto& m) -> Measure {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroMeasure>) {
          return m;
        } else if constexpr (std::is_same_v<T, ObstacleMeasure>) {
          return ObstacleMeasure{set_intersection(m.set, e)};
        } else {
          DensityMeasure out = m;
          out.support = m.support ? set_intersection(*m.support, e) : e;
          return out;
        }
      },
      mu);
}

std::vector<double> lumped_node_mass(const Grid& g, const Measure& mu) {
  std::vector<double> m(g.node_count(), 0.0);
  const auto* d = std::get_if<DensityMeasure>(&mu);
  if (!d) return m;
  if (!(d->density.grid == g)) throw GeometryError("density grid does not match");
  const double w = g.cell_volume() / g.corners_per_cell();
  std::vector<double> fc(g.cell_count());
  for (std::size_t c = 0; c < fc.size(); ++c) fc[c] = cell_mean(d->density, g, c);
  auto add = [&](std::size_t i) {
    double s = 0.0;
    for (auto c : g.cells_around(i)) s += fc[c] * w;
    m[i] = s;
  };
  if (d->support) {
    for (auto i : *d->support) add(i);
  } else {
    for (std::size_t i = 0; i < m.size(); ++i) add(i);
  }
  return m;
}

CsrMatrix mass_matrix(const FemSpace& space, const Measure& mu, MassScheme scheme) {
  const std::size_t n = space.size();
  if (is_obstacle(mu)) throw MeasureError("obstacle measures enter as constraints, not as a mass");
  if (std::holds_alternative<ZeroMeasure>(mu)) return CsrMatrix::from_triplets(n, n, {});
  const Grid& g = space.grid();
  std::vector<Triplet> t;
  if (scheme == MassScheme::lumped) {
    const auto m = lumped_node_mass(g, mu);
    for (std::size_t l = 0; l < n; ++l) {
      const double v = m[space.nodes()[l]];
      if (v != 0.0) t.push_back({l, l, v});
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
  }

  const auto& d = std::get<DensityMeasure>(mu);
  const int dim = g.dim();
  const int nc = g.corners_per_cell();
  const double h = g.spacing();
  const double m1[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  const auto supp = d.support ? d.support->mask() : std::vector<std::uint8_t>{};
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto corners = g.cell_corners(c);
    bool inside = true;
    bool any_supp = supp.empty();
    for (int a = 0; a < nc; ++a) {
      const std::size_t gi = corners[std::size_t(a)];
      if (space.local(gi) == FemSpace::npos) inside = false;
      if (!supp.empty() && supp[gi]) any_supp = true;
    }
    if (!inside || !any_supp) continue;
    const double f = cell_mean(d.density, g, c);
    if (f == 0.0) continue;
    for (int p = 0; p < nc; ++p) {
      for (int q = 0; q < nc; ++q) {
        double prod = 1.0;
        for (int k = 0; k < dim; ++k) prod *= m1[(p >> k) & 1][(q >> k) & 1];
        t.push_back({space.local(corners[std::size_t(p)]), space.local(corners[std::size_t(q)]),
                     f * prod});
      }
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

std::vector<double> load_vector(const FemSpace& space, const SignedDensity& nu) {
  const Grid& g = space.grid();
  if (!(nu.density.grid == g)) throw GeometryError("load grid does not match");
  const double w = g.cell_volume() / g.corners_per_cell();
  std::vector<double> b(space.size(), 0.0);
  for (std::size_t l = 0; l < space.size(); ++l) {
    double s = 0.0;
    for (auto c : g.cells_around(space.nodes()[l])) s += cell_mean(nu.density, g, c) * w;
    b[l] = s;
  }
  return b;
}

KatoNorm kato_norm(const SignedDensity& nu, const Ball& ball, double rescale) {
  const Grid& g = nu.density.grid;
  const int dim = g.dim();
  const double h = g.spacing();
  if (!(ball.radius > 0.0)) throw GeometryError("Kato ball needs a positive radius");
  KatoNorm out;
  out.ball = ball;
  out.kernel = dim == 3 ? KatoKernel::riesz : KatoKernel::logarithmic;
  if (dim == 2) {
    if (rescale <= 0.0) rescale = 4.0 * ball.radius;
    if (rescale < 2.0 * ball.radius * (1.0 - 1e-12))
      throw GeometryError("log kernel rescale length must be at least the ball diameter");
    out.rescale = rescale;
  }
  const double slack = 1e-9 * h;

  struct Src {
    Point y;
    double w;  // |g| h^N
  };
  std::vector<Src> src;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Point y = g.cell_center(c);
    if (!shape_contains(ball, y, dim, slack)) continue;
    const double v = std::abs(cell_mean(nu.density, g, c));
    if (v != 0.0) src.push_back({y, v * g.cell_volume()});
  }
  const NodeSet xs = mask(g, ball);
  if (xs.empty()) throw GeometryError("Kato ball contains no nodes");
  out.argmax = xs.nodes()[0];
  if (src.empty()) return out;

  const double vunit = unit_ball_volume(dim);
  const double near = 0.75 * h;
  double best = -1.0;
  for (auto i : xs) {
    const Point x = g.coords(i);
    double far = 0.0, self_w = 0.0;
    int self_n = 0;
    for (const auto& s : src) {
      bool adjacent = true;
      for (int d = 0; d < dim; ++d)
        if (std::abs(s.y[std::size_t(d)] - x[std::size_t(d)]) > near) {
          adjacent = false;
          break;
        }
      if (adjacent) {
        self_w += s.w;
        ++self_n;
        continue;
      }
      const double r = distance(s.y, x);
      far += s.w * (dim == 3 ? 1.0 / r : std::log(rescale / r));
    }
    double self = 0.0;
    if (self_n > 0) {
      const double vol = self_n * g.cell_volume();
      const double density = self_w / vol;
      const double a = std::pow(vol / vunit, 1.0 / dim);
      self = dim == 3 ? 2.0 * std::numbers::pi * a * a * density
                      : std::numbers::pi * a * a * (std::log(rescale / a) + 0.5) * density;
    }
    const double total = far + self;
    if (total > best) {
      best = total;
      out.argmax = i;
    }
  }
  out.value = best;
  return out;
}

std::vector<KatoNorm> kato_vanishing_profile(const SignedDensity& nu, const Point& center,
                                             std::span<const double> radii, double rescale) {
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] < radii[k - 1])) throw GeometryError("radii must be decreasing");
  if (nu.density.grid.dim() == 2 && rescale <= 0.0 && !radii.empty()) rescale = 4.0 * radii[0];
  std::vector<KatoNorm> out;
  for (double r : radii) out.push_back(kato_norm(nu, Ball{center, r}, rescale));
  return out;
}

}  // namespace rdp
