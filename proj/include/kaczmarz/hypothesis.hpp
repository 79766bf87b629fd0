#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kaczmarz/error.hpp"
#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

// Sufficient conditions for the maximal-residual control to visit every
// row: write P_R(x0) - x_LS = sum_i gamma_i A_i. If A has full row rank and
// every gamma_i > 0, every row index is eventually selected. For
// nonnegative A with no zero rows and ||x_LS|| <= M, choosing
// x0 = sum_i beta_i A_i with beta_i > M / max_j A_ij makes all gamma_i > 0.

struct matrix_assumption_report {
  bool m_le_n = false;

  bool full_row_rank = false;
  std::size_t rank = 0;
  std::vector<std::size_t> dependent_rows;

  bool nonnegative = false;
  std::vector<std::pair<std::size_t, std::size_t>> negative_entries;

  bool no_zero_rows = false;
  std::vector<std::size_t> zero_rows;

  bool all_pass() const noexcept { return m_le_n && full_row_rank && nonnegative && no_zero_rows; }
};

inline matrix_assumption_report check_matrix_assumptions(const matrix& a,
                                                         const tolerances& tol = {}) {
  matrix_assumption_report r;
  r.m_le_n = a.rows() <= a.cols();

  const rank_profile profile = gram_rank_profile(a, tol.rank);
  r.rank = profile.rank;
  r.dependent_rows = profile.dependent_rows;
  r.full_row_rank = a.rows() > 0 && profile.full_row_rank();

  for (std::size_t i = 0; i < a.rows(); ++i) {
    bool zero = true;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) < 0.0) r.negative_entries.emplace_back(i, j);
      if (a(i, j) != 0.0) zero = false;
    }
    if (zero) r.zero_rows.push_back(i);
  }
  r.nonnegative = r.negative_entries.empty();
  r.no_zero_rows = r.zero_rows.empty();
  return r;
}

inline matrix_assumption_report check_matrix_assumptions(const linear_system& system,
                                                         const tolerances& tol = {}) {
  return check_matrix_assumptions(system.a(), tol);
}

/// sqrt(n) * C bounds ||x_LS|| whenever some solution lies in [0, C]^n.
inline double bound_from_box(std::size_t n, double c) {
  if (!(c >= 0.0)) throw error(error_kind::invalid_argument, "box bound C must be >= 0");
  return std::sqrt(static_cast<double>(n)) * c;
}

struct initializer_spec {
  double bound = 0.0;
  /// M_i = max_j A_ij
  vector row_max;
  double delta = 0.0;
  /// beta_i = (1 + delta) M / M_i
  vector beta;
  /// A^T beta
  vector x0;
};

inline initializer_spec construct_x0(const linear_system& system, double bound, double delta,
                                     const tolerances& tol = {}) {
  if (!(delta > 0.0))
    throw error(error_kind::invalid_argument, "delta must be > 0 for a strict margin over M / M_i");
  if (!(bound > 0.0) || !std::isfinite(bound))
    throw error(error_kind::invalid_argument, "bound M must be finite and > 0");

  const auto& a = system.a();
  if (system.m() > system.n())
    throw error(error_kind::assumption_violated,
                "m = " + std::to_string(system.m()) + " exceeds n = " + std::to_string(system.n()));
  for (std::size_t i = 0; i < system.m(); ++i)
    for (std::size_t j = 0; j < system.n(); ++j)
      if (a(i, j) < 0.0)
        throw error(error_kind::assumption_violated, "negative entry at (" + std::to_string(i) +
                                                         ", " + std::to_string(j) + ")");

  const double xls_norm = norm2(min_norm_solution(system, tol));
  if (bound < xls_norm)
    throw error(error_kind::bound_too_small,
                "M = " + std::to_string(bound) + " < ||x_LS|| = " + std::to_string(xls_norm));

  initializer_spec spec;
  spec.bound = bound;
  spec.delta = delta;
  spec.row_max.resize(system.m());
  spec.beta.resize(system.m());
  for (std::size_t i = 0; i < system.m(); ++i) {
    const auto row = system.row(i);
    // rows are nonzero and nonnegative here, so the max is positive
    spec.row_max[i] = *std::max_element(row.begin(), row.end());
    spec.beta[i] = (1.0 + delta) * bound / spec.row_max[i];
  }
  spec.x0 = a.multiply_transpose(spec.beta);
  return spec;
}

struct hypothesis_report {
  vector gamma;
  bool all_positive = false;
  double min_gamma = 0.0;
  /// gamma_i must exceed this: 1e-12 * max_i |gamma_i|
  double pos_tol = 0.0;
  double decomposition_residual = 0.0;
};

/// Decomposes P_R(x0) - x_LS over the rows and tests every gamma_i > pos_tol.
/// all_positive = false does not imply a row is missed; the condition is
/// only sufficient.
inline hypothesis_report check_hypothesis(const linear_system& system, std::span<const double> x0,
                                          const tolerances& tol = {}) {
  if (x0.size() != system.n()) throw error(error_kind::dimension_mismatch, "x0 has wrong length");
  const row_space rs(system, tol);
  const vector v = subtract(rs.project(x0), rs.min_norm_solution());
  decomposition_result dec = rs.decompose(v);

  hypothesis_report r;
  r.gamma = std::move(dec.coefficients);
  r.decomposition_residual = dec.reconstruction_residual;
  r.min_gamma = *std::min_element(r.gamma.begin(), r.gamma.end());
  r.pos_tol = 1e-12 * norm_inf(r.gamma);
  r.all_positive = r.min_gamma > r.pos_tol;
  return r;
}

}  // namespace kaczmarz
