#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdp/grid.hpp"
#include "rdp/sparse.hpp"

namespace rdp {

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Coefficient field a_ij(x) of the divergence-form operator -sum D_j(a_ij D_i u),
/// with declared bound `upper` (|a_ij| <= Lambda) and ellipticity `lower` (lambda).
class EllipticCoefficients {
 public:
  using Field = std::function<Matrix3(const Point&)>;

  static EllipticCoefficients laplacian(int dim);
  static EllipticCoefficients constant(int dim, const Matrix3& a, double lower, double upper);
  static EllipticCoefficients variable(int dim, Field a, double lower, double upper,
                                       std::string name = "variable");

  int dim() const { return dim_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::string& name() const { return name_; }
  bool is_laplacian() const { return laplacian_; }

  /// Raw (possibly non-symmetric) coefficient matrix at x.
  Matrix3 at(const Point& x) const;

  /// Same field multiplied by c > 0, with bounds scaled accordingly.
  EllipticCoefficients scaled(double c) const;

  /// Throws CoefficientError if the declared bounds fail at x. A small relative
  /// slack absorbs rounding. Returns true when a_ij(x) is non-symmetric.
  bool check_at(const Point& x) const;

 private:
  int dim_ = 2;
  double lower_ = 1.0;
  double upper_ = 1.0;
  bool laplacian_ = false;
  std::string name_;
  Field field_;
};

/// Nodal values on every node of a grid.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}
  Field(const Grid& g, std::vector<double> v);

  static Field from_function(const Grid& g, const std::function<double(const Point&)>& f);

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

/// Degrees-of-freedom layout of Q1 elements on a node-set domain.
///
/// Free nodes are interior(domain). Active cells are the cells with at least one
/// free corner; together with the domain nodes their corners form the space
/// nodes, which are numbered locally in increasing global order.
class FemSpace {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit FemSpace(const NodeSet& domain);

  const Grid& grid() const { return domain_.grid(); }
  const NodeSet& domain() const { return domain_; }
  const NodeSet& free() const { return free_; }
  std::span<const std::size_t> cells() const { return cells_; }
  std::span<const std::size_t> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t local(std::size_t global) const { return local_[global]; }
  bool is_free_local(std::size_t l) const { return free_local_[l] != 0; }

  std::vector<double> gather(const Field& u) const;
  /// Field equal to `v` on space nodes and `fill` elsewhere.
  Field scatter(std::span<const double> v, double fill = 0.0) const;

 private:
  NodeSet domain_;
  NodeSet free_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> nodes_;
  std::vector<std::size_t> local_;
  std::vector<std::uint8_t> free_local_;
};

/// Stiffness matrix of a(u, v) over the space nodes of a domain.
struct SystemMatrix {
  std::shared_ptr<const FemSpace> space;
  CsrMatrix matrix;
  double symmetry_error = 0.0;
  std::vector<std::string> warnings;

  /// Rows and columns of the free nodes only, in increasing global order.
  CsrMatrix free_block() const;
};

/// Element matrix of one cell with coefficients sampled (and symmetrized) at the
/// cell center. Entries (a, b) for corners in tensor order; row stride 8.
std::array<double, 64> element_matrix(const Grid& grid, const Matrix3& a);

/// Element matrix of the Laplacian for the given spacing.
std::array<double, 64> laplacian_element(const Grid& grid);

/// Assembles K_ij = a(phi_i, phi_j) over the active cells of `domain`.
///
/// Non-symmetric coefficients are symmetrized with a warning. Throws
/// CoefficientError on a bound violation and GeometryError on an empty interior.
SystemMatrix assemble_stiffness(const NodeSet& domain, const EllipticCoefficients& coeffs);

/// a(u, u) over the active cells of the stiffness matrix.
double energy_of(const SystemMatrix& k, const Field& u);
double bilinear(const SystemMatrix& k, const Field& u, const Field& v);

/// Q1 interpolant of f at x (x clamped into the grid box).
double interpolate(const Field& f, const Point& x);

/// u_c^T K_e u_c for one cell, K_e a row-stride-8 element matrix.
double cell_energy(const Grid& grid, const std::array<double, 64>& ke, const Field& u,
                   std::size_t cell);

/// Exact integral of u^2 over one cell for the Q1 interpolant of u.
double cell_l2(const Grid& grid, const Field& u, std::size_t cell);

/// Constrained quadratic solve on a space: values with known[l] != 0 are held at
/// `x[l]`, the remaining free nodes solve (A x)_l = rhs_l. Non-free nodes are
/// always held. Returns the full vector over the space nodes.
struct ConstrainedSolve {
  std::vector<double> x;
  CgResult cg;
};
ConstrainedSolve solve_constrained(const FemSpace& space, const CsrMatrix& a,
                                   std::span<const double> rhs, std::vector<double> x,
                                   std::span<const std::uint8_t> held, const CgOptions& opts,
                                   std::span<const double> initial = {});

}  // namespace rdp
