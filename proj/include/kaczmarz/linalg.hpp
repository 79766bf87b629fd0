#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kaczmarz/error.hpp"

namespace kaczmarz {

using vector = std::vector<double>;

// ----------------------------------------------------------------------------
// vector kernels
// ----------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

inline vector subtract(std::span<const double> a, std::span<const double> b) {
  vector out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
  return out;
}

inline vector add(std::span<const double> a, std::span<const double> b) {
  vector out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
  return out;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

// ----------------------------------------------------------------------------
// dense row-major matrix
// ----------------------------------------------------------------------------

class matrix {
public:
  matrix() = default;

  matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  matrix(std::size_t rows, std::size_t cols, vector data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw error(error_kind::dimension_mismatch,
                  "matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                      std::to_string(rows_ * cols_));
  }

  /// Builds from nested rows; every row must have the same length.
  static matrix from_rows(const std::vector<vector>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    matrix out(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols)
        throw error(error_kind::dimension_mismatch,
                    "row " + std::to_string(i) + " has length " + std::to_string(rows[i].size()) +
                        ", expected " + std::to_string(cols));
      std::copy(rows[i].begin(), rows[i].end(), out.row(i).begin());
    }
    return out;
  }

  static matrix identity(std::size_t n) {
    matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  // A x
  vector multiply(std::span<const double> x) const {
    vector y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
    return y;
  }

  // A^T y
  vector multiply_transpose(std::span<const double> y) const {
    vector x(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) axpy(y[i], row(i), x);
    return x;
  }

  friend bool operator==(const matrix&, const matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  vector data_;
};

inline vector row_norms_sq(const matrix& a) {
  vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), a.row(i));
  return out;
}

/// Symmetric Gram matrix A A^T, stored in full.
inline matrix gram_matrix(const matrix& a) {
  const std::size_t m = a.rows();
  matrix g(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = dot(a.row(i), a.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

struct tolerances {
  double solve = 1e-9;
  double proj = 1e-9;
  double decomp = 1e-9;
  /// Cholesky pivots below rank * max_diag(A A^T) mark a dependent row.
  double rank = 1e-10;
};

// ----------------------------------------------------------------------------
// linear system
// ----------------------------------------------------------------------------

/// Immutable consistent system A x = b with cached squared row norms.
/// Zero rows are rejected: eliminate them before constructing.
class linear_system {
public:
  linear_system(matrix a, vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() == 0 || a_.cols() == 0)
      throw error(error_kind::invalid_argument, "system needs m >= 1 and n >= 1");
    if (b_.size() != a_.rows())
      throw error(error_kind::dimension_mismatch,
                  "rhs has length " + std::to_string(b_.size()) + ", expected " +
                      std::to_string(a_.rows()));
    for (double v : a_.data())
      if (!std::isfinite(v)) throw error(error_kind::invalid_argument, "matrix has a non-finite entry");
    for (double v : b_)
      if (!std::isfinite(v)) throw error(error_kind::invalid_argument, "rhs has a non-finite entry");
    norms_sq_ = kaczmarz::row_norms_sq(a_);
    for (std::size_t i = 0; i < norms_sq_.size(); ++i)
      if (!(norms_sq_[i] > 0.0))
        throw error(error_kind::assumption_violated, "row " + std::to_string(i) + " is zero");
  }

  std::size_t m() const noexcept { return a_.rows(); }
  std::size_t n() const noexcept { return a_.cols(); }

  const matrix& a() const noexcept { return a_; }
  const vector& b() const noexcept { return b_; }
  std::span<const double> row(std::size_t i) const { return a_.row(i); }
  double rhs(std::size_t i) const { return b_[i]; }

  const vector& row_norms_sq() const noexcept { return norms_sq_; }
  double row_norm_sq(std::size_t i) const { return norms_sq_[i]; }

  /// r = A x - b
  vector residual(std::span<const double> x) const {
    vector r = a_.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
    return r;
  }

private:
  matrix a_;
  vector b_;
  vector norms_sq_;
};

inline vector row_norms_sq(const linear_system& system) { return system.row_norms_sq(); }

// ----------------------------------------------------------------------------
// Gram factorization
// ----------------------------------------------------------------------------

struct rank_profile {
  std::size_t rank = 0;
  /// Rows whose Cholesky pivot fell below threshold, in elimination order.
  std::vector<std::size_t> dependent_rows;

  bool full_row_rank() const noexcept { return dependent_rows.empty(); }
};

/// Lower-triangular Cholesky factor of a symmetric positive semidefinite
/// matrix. Rows whose pivot drops below `rank_tol * max_diag` are recorded
/// as dependent and skipped; the factor is usable for solves only when no
/// row was dependent.
class cholesky {
public:
  cholesky(const matrix& spd, double rank_tol) : size_(spd.rows()), l_(size_, size_) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < size_; ++i) max_diag = std::max(max_diag, spd(i, i));
    threshold_ = rank_tol * max_diag;

    for (std::size_t i = 0; i < size_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (l_(j, j) == 0.0) continue;
        double s = spd(i, j);
        for (std::size_t p = 0; p < j; ++p) s -= l_(i, p) * l_(j, p);
        l_(i, j) = s / l_(j, j);
      }
      double d = spd(i, i);
      for (std::size_t p = 0; p < i; ++p) d -= l_(i, p) * l_(i, p);
      if (!(d > threshold_) || max_diag == 0.0) {
        profile_.dependent_rows.push_back(i);
        for (std::size_t p = 0; p < i; ++p) l_(i, p) = 0.0;
        continue;
      }
      l_(i, i) = std::sqrt(d);
      ++profile_.rank;
    }
  }

  const rank_profile& profile() const noexcept { return profile_; }
  bool ok() const noexcept { return profile_.full_row_rank(); }

  /// Solves (L L^T) y = rhs.
  vector solve(std::span<const double> rhs) const {
    if (!ok())
      throw error(error_kind::rank_deficient,
                  "Gram matrix is numerically singular (first dependent row " +
                      std::to_string(profile_.dependent_rows.front()) + ")");
    vector y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < size_; ++i) {
      double s = y[i];
      for (std::size_t p = 0; p < i; ++p) s -= l_(i, p) * y[p];
      y[i] = s / l_(i, i);
    }
    for (std::size_t i = size_; i-- > 0;) {
      double s = y[i];
      for (std::size_t p = i + 1; p < size_; ++p) s -= l_(p, i) * y[p];
      y[i] = s / l_(i, i);
    }
    return y;
  }

private:
  std::size_t size_;
  matrix l_;
  double threshold_ = 0.0;
  rank_profile profile_;
};

inline rank_profile gram_rank_profile(const matrix& a, double rank_tol = tolerances{}.rank) {
  return cholesky(gram_matrix(a), rank_tol).profile();
}

// ----------------------------------------------------------------------------
// row space / null space
// ----------------------------------------------------------------------------

struct decomposition_result {
  /// gamma with sum_i gamma_i A_i = P_R(v)
  vector coefficients;
  /// || sum_i gamma_i A_i - v ||; equals ||P_N(v)|| up to rounding
  double reconstruction_residual = 0.0;
};

/// Caches the Cholesky factor of A A^T for repeated row-space work on a
/// full-row-rank system. Construction throws rank_deficient otherwise.
class row_space {
public:
  explicit row_space(const linear_system& system, const tolerances& tol = {})
      : system_(&system), factor_(gram_matrix(system.a()), tol.rank) {
    if (!factor_.ok())
      throw error(error_kind::rank_deficient,
                  "rank(A) < m: row " + std::to_string(factor_.profile().dependent_rows.front()) +
                      " depends on earlier rows");
  }

  const linear_system& system() const noexcept { return *system_; }

  /// x_LS = A^T (A A^T)^{-1} b
  vector min_norm_solution() const {
    return system_->a().multiply_transpose(factor_.solve(system_->b()));
  }

  vector coefficients(std::span<const double> v) const {
    return factor_.solve(system_->a().multiply(v));
  }

  decomposition_result decompose(std::span<const double> v) const {
    decomposition_result out;
    out.coefficients = coefficients(v);
    const vector recon = system_->a().multiply_transpose(out.coefficients);
    out.reconstruction_residual = distance(recon, v);
    return out;
  }

  vector project(std::span<const double> v) const {
    return system_->a().multiply_transpose(coefficients(v));
  }

  vector project_null(std::span<const double> v) const { return subtract(v, project(v)); }

private:
  const linear_system* system_;
  cholesky factor_;
};

inline vector min_norm_solution(const linear_system& system, const tolerances& tol = {}) {
  return row_space(system, tol).min_norm_solution();
}

inline decomposition_result decompose_in_row_space(const linear_system& system,
                                                   std::span<const double> v,
                                                   const tolerances& tol = {}) {
  return row_space(system, tol).decompose(v);
}

inline vector project_row_space(const linear_system& system, std::span<const double> v,
                                const tolerances& tol = {}) {
  return row_space(system, tol).project(v);
}

inline vector project_null_space(const linear_system& system, std::span<const double> v,
                                 const tolerances& tol = {}) {
  return row_space(system, tol).project_null(v);
}

}  // namespace kaczmarz
