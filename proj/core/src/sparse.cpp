#include "rdp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "rdp/error.hpp"

namespace rdp {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> entries) {
  for (const auto& t : entries)
    if (t.row >= rows || t.col >= cols) throw Error("triplet index out of range");
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    std::size_t e = k;
    double v = 0.0;
    while (e < entries.size() && entries[e].row == entries[k].row &&
           entries[e].col == entries[k].col) {
      v += entries[e].value;
      ++e;
    }
    m.col_idx_.push_back(entries[k].col);
    m.values_.push_back(v);
    ++m.row_ptr_[entries[k].row + 1];
    k = e;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double CsrMatrix::at(std::size_t row, std::size_t col) const {
  const auto b = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto e = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(b, e, col);
  if (it == e || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[r] = s;
  }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw Error("vector length does not match matrix");
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = at(r, r);
  return d;
}

double CsrMatrix::quadratic_form(std::span<const double> x) const {
  return dot(x, multiply(x));
}

double CsrMatrix::symmetry_error() const {
  double amax = 0.0, diff = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t c = col_idx_[k];
      amax = std::max(amax, std::abs(values_[k]));
      const double t = c < rows_ && r < cols_ ? at(c, r) : 0.0;
      diff = std::max(diff, std::abs(values_[k] - t));
    }
  }
  return amax > 0.0 ? diff / amax : 0.0;
}

CsrMatrix CsrMatrix::submatrix(std::span<const std::size_t> keep) const {
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> map(cols_, kDropped);
  for (std::size_t i = 0; i < keep.size(); ++i) map[keep[i]] = i;
  CsrMatrix m;
  m.rows_ = keep.size();
  m.cols_ = keep.size();
  m.row_ptr_.assign(keep.size() + 1, 0);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t r = keep[i];
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t c = map[col_idx_[k]];
      if (c == kDropped) continue;
      m.col_idx_.push_back(c);
      m.values_.push_back(values_[k]);
    }
    m.row_ptr_[i + 1] = m.col_idx_.size();
  }
  return m;
}

void CsrMatrix::write_triplets(std::ostream& os) const {
  char buf[96];
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", r, col_idx_[k], values_[k]);
      os << buf;
    }
  }
}

CsrMatrix CsrMatrix::scaled(double c) const {
  CsrMatrix m = *this;
  for (auto& v : m.values_) v *= c;
  return m;
}

CsrMatrix operator+(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error("matrix shapes differ");
  std::vector<Triplet> t;
  t.reserve(a.nonzeros() + b.nonzeros());
  for (const CsrMatrix* m : {&a, &b})
    for (std::size_t r = 0; r < m->rows_; ++r)
      for (std::size_t k = m->row_ptr_[r]; k < m->row_ptr_[r + 1]; ++k)
        t.push_back({r, m->col_idx_[k], m->values_[k]});
  return CsrMatrix::from_triplets(a.rows_, a.cols_, std::move(t));
}

CgResult solve_spd(const CsrMatrix& a, std::span<const double> rhs, const CgOptions& opts,
                   std::span<const double> initial) {
  const std::size_t n = a.rows();
  if (a.cols() != n || rhs.size() != n) throw Error("solve_spd: dimension mismatch");
  if (!(opts.rel_tol > 0.0) || opts.rel_tol > 1e-2)
    throw Error("solve_spd: rel_tol must lie in (0, 1e-2]");
  if (!initial.empty() && initial.size() != n) throw Error("solve_spd: bad initial guess size");

  CgResult res;
  res.x.assign(n, 0.0);
  if (!initial.empty()) std::copy(initial.begin(), initial.end(), res.x.begin());
  res.rhs_norm = norm2(rhs);
  if (n == 0) return res;
  if (res.rhs_norm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }

  const std::vector<double> d = a.diagonal();
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(d[i] > 0.0)) throw SolverError("solve_spd: non-positive diagonal entry");
    inv[i] = 1.0 / d[i];
  }

  const std::size_t cap = opts.max_iterations
                              ? opts.max_iterations
                              : static_cast<std::size_t>(std::ceil(50.0 * std::sqrt(double(n))));
  const double target = opts.rel_tol * res.rhs_norm;

  std::vector<double> r(n), z(n), p(n), q(n);
  auto true_residual = [&] {
    a.multiply(res.x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
    return norm2(r);
  };

  double rnorm = true_residual();
  std::size_t it = 0;
  while (true) {
    if (rnorm <= target) {
      // The recursive residual drifts; confirm against the true one before stopping.
      rnorm = true_residual();
      if (rnorm <= target) break;
    }
    if (it >= cap) {
      res.iterations = it;
      res.residual_norm = rnorm;
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "solve_spd: no convergence after %zu iterations (relative residual %.3e)",
                    it, rnorm / res.rhs_norm);
      throw SolverError(buf);
    }
    // (Re)start from the current residual.
    for (std::size_t i = 0; i < n; ++i) z[i] = inv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (it < cap && rnorm > target) {
      a.multiply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) throw SolverError("solve_spd: matrix is not positive definite");
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        res.x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      ++it;
      rnorm = norm2(r);
      for (std::size_t i = 0; i < n; ++i) z[i] = inv[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }
  res.iterations = it;
  res.residual_norm = rnorm;
  return res;
}

}  // namespace rdp
