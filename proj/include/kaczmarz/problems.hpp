#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "kaczmarz/error.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {

/// Synthetic tomography-like problem: sparse nonnegative rows and a solution
/// z in the box [0, C]^n.
struct generator_config {
  std::size_t m = 20;
  std::size_t n = 50;
  /// fraction of nonzeros per row; density * n >= 1
  double density = 0.2;
  double c = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_retries = 100;

  void validate() const {
    if (m < 1) throw error(error_kind::invalid_argument, "m must be >= 1");
    if (m > n)
      throw error(error_kind::invalid_argument,
                  "m = " + std::to_string(m) + " exceeds n = " + std::to_string(n));
    if (!(density > 0.0 && density <= 1.0))
      throw error(error_kind::invalid_argument, "density must lie in (0, 1]");
    if (density * static_cast<double>(n) < 1.0)
      throw error(error_kind::invalid_argument, "density * n must be >= 1");
    if (!(c > 0.0) || !std::isfinite(c)) throw error(error_kind::invalid_argument, "C must be > 0");
  }

  std::size_t nonzeros_per_row() const {
    const auto k = static_cast<std::size_t>(std::lround(density * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n);
  }
};

struct generated_problem {
  linear_system system;
  /// the planted solution, A z = b
  vector z;
};

namespace detail {

inline void fill_sparse_row(std::span<double> row, std::size_t nnz, counter_rng& rng,
                            std::vector<std::size_t>& scratch) {
  const std::size_t n = row.size();
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  // partial Fisher-Yates picks the support
  for (std::size_t p = 0; p < nnz; ++p) {
    const std::size_t q = p + static_cast<std::size_t>(rng.next_below(n - p));
    std::swap(scratch[p], scratch[q]);
  }
  std::fill(row.begin(), row.end(), 0.0);
  for (std::size_t p = 0; p < nnz; ++p) row[scratch[p]] = 1.0 - rng.next_unit();  // in (0, 1]
}

}  // namespace detail

/// Rows have `nonzeros_per_row()` entries uniform in (0, 1] on a random
/// support. Rows that the Gram-Cholesky rank check flags as dependent are
/// redrawn, at most `max_retries` times in total. z is uniform in [0, C]^n
/// and b = A z, so ||x_LS|| <= ||z|| <= sqrt(n) C.
inline generated_problem generate_ct_like(const generator_config& config,
                                          const tolerances& tol = {}) {
  config.validate();
  counter_rng rng(config.seed);
  const std::size_t nnz = config.nonzeros_per_row();
  std::vector<std::size_t> scratch;

  matrix a(config.m, config.n);
  for (std::size_t i = 0; i < config.m; ++i) detail::fill_sparse_row(a.row(i), nnz, rng, scratch);

  std::size_t retries = 0;
  for (rank_profile profile = gram_rank_profile(a, tol.rank); !profile.full_row_rank();
       profile = gram_rank_profile(a, tol.rank)) {
    if (retries == config.max_retries)
      throw error(error_kind::rank_retry_exhausted,
                  "no full-row-rank matrix after " + std::to_string(retries) + " retries");
    ++retries;
    for (std::size_t i : profile.dependent_rows) detail::fill_sparse_row(a.row(i), nnz, rng, scratch);
  }

  vector z(config.n);
  for (double& zj : z) zj = config.c * rng.next_unit();
  vector b = a.multiply(z);
  return {linear_system(std::move(a), std::move(b)), std::move(z)};
}

}  // namespace kaczmarz
