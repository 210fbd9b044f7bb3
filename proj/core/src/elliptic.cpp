#include "rdp/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rdp/error.hpp"

namespace rdp {

namespace {

constexpr double kBoundSlack = 1e-12;

// Unit probe directions with components in {-1, 0, 1}, one per +/- pair.
std::vector<Point> probe_directions(int dim) {
  std::vector<Point> out;
  const int zr = dim == 3 ? 1 : 0;
  for (int z = -zr; z <= zr; ++z) {
    for (int y = -1; y <= 1; ++y) {
      for (int x = -1; x <= 1; ++x) {
        const std::array<int, 3> v{x, y, z};
        int first = 0;
        for (int c : v)
          if (c != 0) {
            first = c;
            break;
          }
        if (first <= 0) continue;
        const double n = std::sqrt(double(x * x + y * y + z * z));
        out.push_back({x / n, y / n, z / n});
      }
    }
  }
  return out;
}

Matrix3 identity3() {
  Matrix3 a{};
  for (std::size_t i = 0; i < 3; ++i) a[i][i] = 1.0;
  return a;
}

}  // namespace

EllipticCoefficients EllipticCoefficients::laplacian(int dim) {
  EllipticCoefficients c = constant(dim, identity3(), 1.0, 1.0);
  c.laplacian_ = true;
  c.name_ = "laplacian";
  return c;
}

EllipticCoefficients EllipticCoefficients::constant(int dim, const Matrix3& a, double lower,
                                                    double upper) {
  EllipticCoefficients c = variable(
      dim, [a](const Point&) { return a; }, lower, upper, "constant");
  return c;
}

EllipticCoefficients EllipticCoefficients::variable(int dim, Field a, double lower, double upper,
                                                    std::string name) {
  if (dim != 2 && dim != 3) throw GeometryError("coefficient dimension must be 2 or 3");
  if (!(lower > 0.0) || !(upper >= lower))
    throw CoefficientError("need 0 < lambda <= Lambda");
  EllipticCoefficients c;
  c.dim_ = dim;
  c.lower_ = lower;
  c.upper_ = upper;
  c.name_ = std::move(name);
  c.field_ = std::move(a);
  return c;
}

Matrix3 EllipticCoefficients::at(const Point& x) const { return field_(x); }

EllipticCoefficients EllipticCoefficients::scaled(double c) const {
  if (!(c > 0.0)) throw CoefficientError("coefficient scale must be positive");
  EllipticCoefficients out = *this;
  out.lower_ *= c;
  out.upper_ *= c;
  out.laplacian_ = laplacian_ && c == 1.0;
  auto f = field_;
  out.field_ = [f, c](const Point& x) {
    Matrix3 a = f(x);
    for (auto& row : a)
      for (auto& v : row) v *= c;
    return a;
  };
  out.name_ = name_ + "*scaled";
  return out;
}

bool EllipticCoefficients::check_at(const Point& x) const {
  const Matrix3 a = at(x);
  bool nonsym = false;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const double v = a[std::size_t(i)][std::size_t(j)];
      if (!std::isfinite(v) || std::abs(v) > upper_ * (1.0 + kBoundSlack)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "|a_%d%d| = %.6g exceeds Lambda = %.6g", i + 1, j + 1,
                      std::abs(v), upper_);
        throw CoefficientError(buf);
      }
      if (v != a[std::size_t(j)][std::size_t(i)]) nonsym = true;
    }
  }
  for (const Point& xi : probe_directions(dim_)) {
    double q = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        q += a[std::size_t(i)][std::size_t(j)] * xi[std::size_t(i)] * xi[std::size_t(j)];
    if (q < lower_ * (1.0 - kBoundSlack)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "ellipticity fails: a(xi, xi) = %.6g < lambda = %.6g", q,
                    lower_);
      throw CoefficientError(buf);
    }
  }
  return nonsym;
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.node_count()) throw GeometryError("field size does not match grid");
}

Field Field::from_function(const Grid& g, const std::function<double(const Point&)>& f) {
  Field out(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) out.values[i] = f(g.coords(i));
  return out;
}

FemSpace::FemSpace(const NodeSet& domain) : domain_(domain), free_(interior_nodes(domain)) {
  const Grid& g = domain_.grid();
  const auto free_mask = free_.mask();
  std::vector<std::uint8_t> used(g.node_count(), 0);
  for (auto i : domain_) used[i] = 1;
  std::vector<std::uint8_t> cell_seen(g.cell_count(), 0);
  for (auto i : free_) {
    for (auto c : g.cells_around(i)) cell_seen[c] = 1;
  }
  const int nc = g.corners_per_cell();
  for (std::size_t c = 0; c < cell_seen.size(); ++c) {
    if (!cell_seen[c]) continue;
    cells_.push_back(c);
    const auto corners = g.cell_corners(c);
    for (int a = 0; a < nc; ++a) used[corners[std::size_t(a)]] = 1;
  }
  local_.assign(g.node_count(), npos);
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) continue;
    local_[i] = nodes_.size();
    nodes_.push_back(i);
    free_local_.push_back(free_mask[i]);
  }
}

std::vector<double> FemSpace::gather(const Field& u) const {
  if (!(u.grid == grid())) throw GeometryError("field grid does not match the space");
  std::vector<double> v(nodes_.size());
  for (std::size_t l = 0; l < nodes_.size(); ++l) v[l] = u.values[nodes_[l]];
  return v;
}

Field FemSpace::scatter(std::span<const double> v, double fill) const {
  Field u(grid(), fill);
  for (std::size_t l = 0; l < nodes_.size(); ++l) u.values[nodes_[l]] = v[l];
  return u;
}

CsrMatrix SystemMatrix::free_block() const {
  std::vector<std::size_t> keep;
  for (std::size_t l = 0; l < space->size(); ++l)
    if (space->is_free_local(l)) keep.push_back(l);
  return matrix.submatrix(keep);
}

std::array<double, 64> element_matrix(const Grid& grid, const Matrix3& araw) {
  const int dim = grid.dim();
  const double h = grid.spacing();
  // 1-D tables on [0, h] for the hat functions phi_0 = 1 - t/h, phi_1 = t/h.
  const double m1[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  const double s1[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
  // c1[a][b] = integral of phi_a' * phi_b.
  const double c1[2][2] = {{-0.5, -0.5}, {0.5, 0.5}};

  Matrix3 a{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) a[i][j] = 0.5 * (araw[i][j] + araw[j][i]);

  std::array<double, 64> k{};
  const int nc = 1 << dim;
  for (int p = 0; p < nc; ++p) {
    for (int q = 0; q < nc; ++q) {
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          const double aij = a[std::size_t(i)][std::size_t(j)];
          if (aij == 0.0) continue;
          double prod = 1.0;
          for (int d = 0; d < dim; ++d) {
            const int pd = (p >> d) & 1;
            const int qd = (q >> d) & 1;
            if (i == j && d == i) {
              prod *= s1[pd][qd];
            } else if (d == i) {
              prod *= c1[pd][qd];
            } else if (d == j) {
              prod *= c1[qd][pd];
            } else {
              prod *= m1[pd][qd];
            }
          }
          sum += aij * prod;
        }
      }
      k[std::size_t(p * 8 + q)] = sum;
    }
  }
  return k;
}

std::array<double, 64> laplacian_element(const Grid& grid) {
  Matrix3 a{};
  for (std::size_t i = 0; i < 3; ++i) a[i][i] = 1.0;
  return element_matrix(grid, a);
}

SystemMatrix assemble_stiffness(const NodeSet& domain, const EllipticCoefficients& coeffs) {
  const Grid& g = domain.grid();
  if (coeffs.dim() != g.dim()) throw GeometryError("coefficient and grid dimensions differ");
  SystemMatrix out;
  auto space = std::make_shared<FemSpace>(domain);
  if (space->free().empty()) throw GeometryError("domain has no interior nodes");

  const int nc = g.corners_per_cell();
  std::vector<Triplet> trip;
  trip.reserve(space->cells().size() * std::size_t(nc * nc));
  bool nonsym = false;
  const bool constant_field = coeffs.is_laplacian();
  std::array<double, 64> ke{};
  if (constant_field) ke = element_matrix(g, coeffs.at(Point{}));
  for (auto c : space->cells()) {
    if (!constant_field) {
      const Point xc = g.cell_center(c);
      nonsym = coeffs.check_at(xc) || nonsym;
      ke = element_matrix(g, coeffs.at(xc));
    }
    const auto corners = g.cell_corners(c);
    for (int p = 0; p < nc; ++p) {
      const std::size_t lp = space->local(corners[std::size_t(p)]);
      for (int q = 0; q < nc; ++q) {
        trip.push_back({lp, space->local(corners[std::size_t(q)]), ke[std::size_t(p * 8 + q)]});
      }
    }
  }
  if (nonsym) out.warnings.push_back("non-symmetric coefficients were symmetrized");
  out.matrix = CsrMatrix::from_triplets(space->size(), space->size(), std::move(trip));
  out.symmetry_error = out.matrix.symmetry_error();
  out.space = std::move(space);
  return out;
}

double energy_of(const SystemMatrix& k, const Field& u) { return bilinear(k, u, u); }

double bilinear(const SystemMatrix& k, const Field& u, const Field& v) {
  const auto us = k.space->gather(u);
  const auto vs = k.space->gather(v);
  return dot(us, k.matrix.multiply(vs));
}

double interpolate(const Field& f, const Point& x) {
  const Grid& g = f.grid;
  const int dim = g.dim();
  const double h = g.spacing();
  MultiIndex m{0, 0, 0};
  double t[3] = {0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    const auto du = std::size_t(d);
    const double s = (x[du] - g.lower()[du]) / h;
    const double cmax = double(g.cells_along(d)) - 1.0;
    const double c = std::clamp(std::floor(s), 0.0, cmax);
    m[du] = std::size_t(c);
    t[d] = std::clamp(s - c, 0.0, 1.0);
  }
  const auto corners = g.cell_corners(g.cell_index(m));
  double v = 0.0;
  for (int a = 0; a < g.corners_per_cell(); ++a) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) w *= ((a >> d) & 1) ? t[d] : 1.0 - t[d];
    v += w * f.values[corners[std::size_t(a)]];
  }
  return v;
}

double cell_energy(const Grid& grid, const std::array<double, 64>& ke, const Field& u,
                   std::size_t cell) {
  const auto corners = grid.cell_corners(cell);
  const int nc = grid.corners_per_cell();
  double s = 0.0;
  for (int p = 0; p < nc; ++p) {
    double row = 0.0;
    for (int q = 0; q < nc; ++q) row += ke[std::size_t(p * 8 + q)] * u.values[corners[std::size_t(q)]];
    s += u.values[corners[std::size_t(p)]] * row;
  }
  return s;
}

double cell_l2(const Grid& grid, const Field& u, std::size_t cell) {
  const double h = grid.spacing();
  const double m1[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  const auto corners = grid.cell_corners(cell);
  const int nc = grid.corners_per_cell();
  double s = 0.0;
  for (int p = 0; p < nc; ++p) {
    for (int q = 0; q < nc; ++q) {
      double prod = 1.0;
      for (int k = 0; k < grid.dim(); ++k) prod *= m1[(p >> k) & 1][(q >> k) & 1];
      s += prod * u.values[corners[std::size_t(p)]] * u.values[corners[std::size_t(q)]];
    }
  }
  return s;
}

ConstrainedSolve solve_constrained(const FemSpace& space, const CsrMatrix& a,
                                   std::span<const double> rhs, std::vector<double> x,
                                   std::span<const std::uint8_t> held, const CgOptions& opts,
                                   std::span<const double> initial) {
  const std::size_t n = space.size();
  if (a.rows() != n || rhs.size() != n || x.size() != n || (!held.empty() && held.size() != n))
    throw Error("solve_constrained: size mismatch");
  std::vector<std::size_t> unknown;
  for (std::size_t l = 0; l < n; ++l)
    if (space.is_free_local(l) && (held.empty() || !held[l])) unknown.push_back(l);

  std::vector<double> known = x;
  for (auto l : unknown) known[l] = 0.0;
  const std::vector<double> ax = a.multiply(known);
  std::vector<double> b(unknown.size());
  std::vector<double> x0;
  if (!initial.empty()) x0.resize(unknown.size());
  for (std::size_t k = 0; k < unknown.size(); ++k) {
    b[k] = rhs[unknown[k]] - ax[unknown[k]];
    if (!initial.empty()) x0[k] = initial[unknown[k]];
  }
  ConstrainedSolve out;
  const CsrMatrix sub = a.submatrix(unknown);
  out.cg = solve_spd(sub, b, opts, x0);
  for (std::size_t k = 0; k < unknown.size(); ++k) known[unknown[k]] = out.cg.x[k];
  out.x = std::move(known);
  return out;
}

}  // namespace rdp
