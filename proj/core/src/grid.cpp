#include "rdp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>

#include "rdp/error.hpp"

namespace rdp {

namespace {

constexpr double kSnapTol = 1e-9;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Grid Grid::build(int dim, std::span<const AxisRange> box, double h,
                 std::vector<std::string>* warnings) {
  if (dim != 2 && dim != 3) throw GeometryError("grid dimension must be 2 or 3");
  if (box.size() != static_cast<std::size_t>(dim))
    throw GeometryError("box must have one range per dimension");
  if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("grid spacing must be positive");
  for (const auto& r : box) {
    if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
      throw GeometryError("degenerate box axis");
  }

  Grid g;
  g.dim_ = dim;
  const double len0 = box[0].hi - box[0].lo;
  const double cells0 = std::ceil(len0 / h - kSnapTol);
  g.h_ = len0 / cells0;
  if (std::abs(g.h_ - h) > kSnapTol * h && warnings) {
    warnings->push_back("spacing snapped from " + format_double(h) + " to " +
                        format_double(g.h_));
  }
  for (int d = 0; d < dim; ++d) {
    const auto du = static_cast<std::size_t>(d);
    const double len = box[du].hi - box[du].lo;
    const double cells = std::ceil(len / g.h_ - kSnapTol);
    if (std::abs(cells * g.h_ - len) > kSnapTol * len && warnings) {
      warnings->push_back("axis " + std::to_string(d) + " extended to " +
                          format_double(box[du].lo + cells * g.h_));
    }
    g.lo_[du] = box[du].lo;
    g.n_[du] = static_cast<std::size_t>(cells) + 1;
    if (g.n_[du] < 3) throw GeometryError("grid needs at least 3 nodes per axis");
  }
  return g;
}

double Grid::cell_volume() const { return std::pow(h_, dim_); }

std::size_t Grid::cells_along(int axis) const {
  if (axis >= dim_) return 1;
  return n_[static_cast<std::size_t>(axis)] - 1;
}

std::size_t Grid::cell_count() const { return cells_along(0) * cells_along(1) * cells_along(2); }

std::size_t Grid::stride(int axis) const {
  std::size_t s = 1;
  for (int d = 0; d < axis; ++d) s *= n_[static_cast<std::size_t>(d)];
  return s;
}

Point Grid::upper() const {
  Point p = lo_;
  for (int d = 0; d < dim_; ++d) {
    const auto du = static_cast<std::size_t>(d);
    p[du] += static_cast<double>(n_[du] - 1) * h_;
  }
  return p;
}

MultiIndex Grid::multi_index(std::size_t node) const {
  MultiIndex m{0, 0, 0};
  m[0] = node % n_[0];
  node /= n_[0];
  m[1] = node % n_[1];
  m[2] = node / n_[1];
  return m;
}

std::size_t Grid::index(const MultiIndex& m) const { return m[0] + n_[0] * (m[1] + n_[1] * m[2]); }

Point Grid::coords(std::size_t node) const {
  const MultiIndex m = multi_index(node);
  Point p{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) {
    const auto du = static_cast<std::size_t>(d);
    p[du] = lo_[du] + static_cast<double>(m[du]) * h_;
  }
  return p;
}

bool Grid::contains(const Point& x, double slack) const {
  const Point hi = upper();
  for (int d = 0; d < dim_; ++d) {
    const auto du = static_cast<std::size_t>(d);
    if (x[du] < lo_[du] - slack || x[du] > hi[du] + slack) return false;
  }
  return true;
}

std::size_t Grid::nearest_node(const Point& x) const {
  MultiIndex m{0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    const auto du = static_cast<std::size_t>(d);
    const double t = std::round((x[du] - lo_[du]) / h_);
    const double hi = static_cast<double>(n_[du] - 1);
    m[du] = static_cast<std::size_t>(std::clamp(t, 0.0, hi));
  }
  return index(m);
}

std::size_t Grid::cell_origin(std::size_t cell) const {
  const std::size_t c0 = cells_along(0);
  const std::size_t c1 = cells_along(1);
  MultiIndex m{cell % c0, (cell / c0) % c1, cell / (c0 * c1)};
  return index(m);
}

std::size_t Grid::cell_index(const MultiIndex& m) const {
  return m[0] + cells_along(0) * (m[1] + cells_along(1) * m[2]);
}

Point Grid::cell_center(std::size_t cell) const {
  Point p = coords(cell_origin(cell));
  for (int d = 0; d < dim_; ++d) p[static_cast<std::size_t>(d)] += 0.5 * h_;
  return p;
}

std::array<std::size_t, 8> Grid::cell_corners(std::size_t cell) const {
  std::array<std::size_t, 8> out{};
  const std::size_t o = cell_origin(cell);
  const std::size_t sx = 1, sy = n_[0], sz = n_[0] * n_[1];
  const int nc = corners_per_cell();
  for (int a = 0; a < nc; ++a) {
    std::size_t idx = o;
    if (a & 1) idx += sx;
    if (a & 2) idx += sy;
    if (a & 4) idx += sz;
    out[static_cast<std::size_t>(a)] = idx;
  }
  return out;
}

std::vector<std::size_t> Grid::cells_around(std::size_t node) const {
  const MultiIndex m = multi_index(node);
  std::vector<std::size_t> out;
  const int nz = dim_ == 3 ? 2 : 1;
  for (int dz = nz - 1; dz >= 0; --dz) {
    for (int dy = 1; dy >= 0; --dy) {
      for (int dx = 1; dx >= 0; --dx) {
        const std::array<int, 3> off{dx, dy, dz};
        MultiIndex c{0, 0, 0};
        bool ok = true;
        for (int d = 0; d < dim_; ++d) {
          const auto du = static_cast<std::size_t>(d);
          const auto o = static_cast<std::size_t>(off[du]);
          if (m[du] < o || m[du] - o >= cells_along(d)) {
            ok = false;
            break;
          }
          c[du] = m[du] - o;
        }
        if (ok) out.push_back(cell_index(c));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Grid::on_box_face(std::size_t node) const {
  const MultiIndex m = multi_index(node);
  for (int d = 0; d < dim_; ++d) {
    const auto du = static_cast<std::size_t>(d);
    if (m[du] == 0 || m[du] + 1 == n_[du]) return true;
  }
  return false;
}

NodeSet::NodeSet(Grid grid, std::vector<std::size_t> nodes)
    : grid_(std::move(grid)), nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  if (!nodes_.empty() && nodes_.back() >= grid_.node_count())
    throw GeometryError("node index outside the grid");
}

NodeSet NodeSet::all(const Grid& grid) {
  std::vector<std::size_t> v(grid.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return NodeSet(grid, std::move(v));
}

NodeSet NodeSet::none(const Grid& grid) { return NodeSet(grid, {}); }

NodeSet NodeSet::from_mask(const Grid& grid, const std::vector<std::uint8_t>& m) {
  if (m.size() != grid.node_count()) throw GeometryError("mask size does not match grid");
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) v.push_back(i);
  return NodeSet(grid, std::move(v));
}

bool NodeSet::contains(std::size_t node) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), node);
}

bool NodeSet::is_subset_of(const NodeSet& other) const {
  return std::includes(other.nodes_.begin(), other.nodes_.end(), nodes_.begin(), nodes_.end());
}

std::vector<std::uint8_t> NodeSet::mask() const {
  std::vector<std::uint8_t> m(grid_.node_count(), 0);
  for (auto i : nodes_) m[i] = 1;
  return m;
}

namespace {

void require_same_grid(const NodeSet& a, const NodeSet& b) {
  if (!(a.grid() == b.grid())) throw GeometryError("node sets belong to different grids");
}

}  // namespace

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  require_same_grid(a, b);
  std::vector<std::size_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return NodeSet(a.grid(), std::move(out));
}

NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
  require_same_grid(a, b);
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return NodeSet(a.grid(), std::move(out));
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  require_same_grid(a, b);
  std::vector<std::size_t> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return NodeSet(a.grid(), std::move(out));
}

NodeSet set_complement(const NodeSet& a) { return set_difference(NodeSet::all(a.grid()), a); }

bool shape_contains(const Shape& shape, const Point& x, int dim, double slack) {
  auto dist_nd = [dim](const Point& p, const Point& q) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double t = p[static_cast<std::size_t>(d)] - q[static_cast<std::size_t>(d)];
      s += t * t;
    }
    return std::sqrt(s);
  };
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return dist_nd(x, s.center) <= s.radius + slack;
        } else if constexpr (std::is_same_v<T, Annulus>) {
          const double r = dist_nd(x, s.center);
          return r >= s.inner - slack && r <= s.outer + slack;
        } else if constexpr (std::is_same_v<T, HalfSpace>) {
          double v = 0.0;
          for (int d = 0; d < dim; ++d)
            v += s.normal[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
          return v <= s.offset + slack;
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          for (int d = 0; d < dim; ++d) {
            const auto du = static_cast<std::size_t>(d);
            if (x[du] < s.lo[du] - slack || x[du] > s.hi[du] + slack) return false;
          }
          return true;
        } else {
          return s ? s(x) : false;
        }
      },
      shape);
}

NodeSet mask(const Grid& grid, const Shape& shape) {
  // Absorbs rounding in node coordinates so that nodes lying exactly on a sphere count.
  const double slack = 1e-9 * grid.spacing();
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    if (shape_contains(shape, grid.coords(i), grid.dim(), slack)) v.push_back(i);
  return NodeSet(grid, std::move(v));
}

std::vector<std::size_t> cells_in_ball(const Grid& grid, const Ball& ball) {
  const double slack = 1e-9 * grid.spacing();
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    if (shape_contains(ball, grid.cell_center(c), grid.dim(), slack)) out.push_back(c);
  return out;
}

NodeSet boundary_nodes(const NodeSet& domain) {
  const Grid& g = domain.grid();
  const auto m = domain.mask();
  std::vector<std::size_t> out;
  for (auto i : domain) {
    bool edge = g.on_box_face(i);
    if (!edge) g.for_each_axis_neighbor(i, [&](std::size_t j) { edge = edge || !m[j]; });
    if (edge) out.push_back(i);
  }
  return NodeSet(g, std::move(out));
}

NodeSet interior_nodes(const NodeSet& domain) {
  return set_difference(domain, boundary_nodes(domain));
}

}  // namespace rdp
