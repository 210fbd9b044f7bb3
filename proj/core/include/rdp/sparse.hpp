#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace rdp {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix with sorted column indices in every row.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Duplicate entries are summed in input order, which keeps the result deterministic.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
  static CsrMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  double at(std::size_t row, std::size_t col) const;
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  double quadratic_form(std::span<const double> x) const;

  /// Max |A_ij - A_ji| divided by max |A_ij|; 0 for an empty matrix.
  double symmetry_error() const;

  /// Rows and columns restricted to `keep` (sorted indices into this matrix).
  CsrMatrix submatrix(std::span<const std::size_t> keep) const;

  /// Writes one "row col value" line per stored entry in row-major order.
  void write_triplets(std::ostream& os) const;

  CsrMatrix scaled(double c) const;
  friend CsrMatrix operator+(const CsrMatrix& a, const CsrMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

struct CgOptions {
  double rel_tol = 1e-8;
  /// 0 selects the default cap ceil(50 * sqrt(n)).
  std::size_t max_iterations = 0;
};

struct CgResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite matrix.
///
/// Stops when ||A x - b|| <= rel_tol ||b||, measured on the true residual.
/// Throws SolverError when the iteration cap is reached, and CoefficientError
/// style failures (non-positive diagonal or curvature) also surface as SolverError.
CgResult solve_spd(const CsrMatrix& a, std::span<const double> rhs, const CgOptions& opts = {},
                   std::span<const double> initial = {});

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace rdp
