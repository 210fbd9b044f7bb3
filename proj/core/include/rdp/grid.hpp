#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rdp {

// Points always carry three coordinates; components beyond the grid dimension are 0.
using Point = std::array<double, 3>;
using MultiIndex = std::array<std::size_t, 3>;

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

double distance(const Point& a, const Point& b);

/// Uniform structured grid over an axis-aligned box in 2 or 3 dimensions.
///
/// Nodes are numbered with axis 0 fastest. Cells are numbered by their lower
/// corner node multi-index, so cell (i, j, k) spans nodes i..i+1, j..j+1, k..k+1.
class Grid {
 public:
  Grid() = default;

  /// Builds a grid of spacing at most `h` over `box`.
  ///
  /// If `h` does not divide the first axis length, the spacing is snapped down to
  /// the largest value giving an integer number of cells. Remaining axes are
  /// extended upward to a whole number of cells when needed. Each adjustment
  /// appends a message to `warnings` when it is non-null.
  static Grid build(int dim, std::span<const AxisRange> box, double h,
                    std::vector<std::string>* warnings = nullptr);

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  double cell_volume() const;
  std::size_t nodes_along(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  std::size_t node_count() const { return n_[0] * n_[1] * n_[2]; }
  std::size_t cells_along(int axis) const;
  std::size_t cell_count() const;
  std::size_t stride(int axis) const;
  const Point& lower() const { return lo_; }
  Point upper() const;

  MultiIndex multi_index(std::size_t node) const;
  std::size_t index(const MultiIndex& m) const;
  Point coords(std::size_t node) const;
  bool contains(const Point& x, double slack = 0.0) const;
  /// Nearest node to `x`, with coordinates clamped into the box.
  std::size_t nearest_node(const Point& x) const;

  /// Lower-corner node of a cell, indexed in cell numbering.
  std::size_t cell_origin(std::size_t cell) const;
  std::size_t cell_index(const MultiIndex& lower_corner) const;
  Point cell_center(std::size_t cell) const;
  /// Corner nodes in tensor order (axis 0 bit fastest); 2^dim entries are valid.
  std::array<std::size_t, 8> cell_corners(std::size_t cell) const;
  int corners_per_cell() const { return 1 << dim_; }

  /// Cells that have `node` as a corner, in increasing cell order.
  std::vector<std::size_t> cells_around(std::size_t node) const;

  /// Calls f(neighbor) for every axis neighbor (distance h) of `node`.
  template <class F>
  void for_each_axis_neighbor(std::size_t node, F&& f) const {
    const MultiIndex m = multi_index(node);
    for (int d = 0; d < dim_; ++d) {
      const auto du = static_cast<std::size_t>(d);
      if (m[du] > 0) f(node - stride(d));
      if (m[du] + 1 < n_[du]) f(node + stride(d));
    }
  }

  /// True when `node` has fewer than 2*dim axis neighbors (lies on a box face).
  bool on_box_face(std::size_t node) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_ = 2;
  double h_ = 1.0;
  Point lo_{0.0, 0.0, 0.0};
  std::array<std::size_t, 3> n_{1, 1, 1};
};

/// Sorted set of node indices of one grid.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(Grid grid, std::vector<std::size_t> nodes);

  static NodeSet all(const Grid& grid);
  static NodeSet none(const Grid& grid);
  static NodeSet from_mask(const Grid& grid, const std::vector<std::uint8_t>& mask);

  const Grid& grid() const { return grid_; }
  std::span<const std::size_t> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  bool contains(std::size_t node) const;
  bool is_subset_of(const NodeSet& other) const;
  std::vector<std::uint8_t> mask() const;

  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }

  bool operator==(const NodeSet& other) const = default;

 private:
  Grid grid_;
  std::vector<std::size_t> nodes_;
};

NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_intersection(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
NodeSet set_complement(const NodeSet& a);

struct Ball {
  Point center{};
  double radius = 0.0;
};

struct Annulus {
  Point center{};
  double inner = 0.0;
  double outer = 0.0;
};

/// Closed half-space {x : normal . x <= offset}.
struct HalfSpace {
  Point normal{1.0, 0.0, 0.0};
  double offset = 0.0;
};

struct AxisBox {
  Point lo{};
  Point hi{};
};

using PointPredicate = std::function<bool(const Point&)>;
using Shape = std::variant<Ball, Annulus, HalfSpace, AxisBox, PointPredicate>;

/// Closed-set membership test used by `mask`; `slack` widens every inequality.
bool shape_contains(const Shape& shape, const Point& x, int dim, double slack);

/// Nodes whose coordinates satisfy the (closed) shape condition.
NodeSet mask(const Grid& grid, const Shape& shape);

/// Cells whose center lies in the closed ball.
std::vector<std::size_t> cells_in_ball(const Grid& grid, const Ball& ball);

/// Nodes of `domain` with at least one axis neighbor outside `domain` or outside the box.
NodeSet boundary_nodes(const NodeSet& domain);

/// domain minus boundary_nodes(domain): the nodes carrying unknowns in H^1_0 problems.
NodeSet interior_nodes(const NodeSet& domain);

}  // namespace rdp
