#pragma once

// Reference computations used only by the tests. They deliberately avoid
// the library's Gram/Cholesky path.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/rational.hpp>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz::oracle {

using ld = long double;
using rational = boost::rational<long long>;

/// Minimal-norm solution of a full-row-rank A x = b from a Householder QR of
/// A^T in extended precision: A^T = Q R, so x = Q R^{-T} b.
inline std::vector<ld> pinv_min_norm(const matrix& a, const vector& b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m > n) throw std::invalid_argument("oracle needs m <= n");
  // w = A^T, n x m, column-major: w[j][i]
  std::vector<std::vector<ld>> w(m, std::vector<ld>(n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[i][j] = a(i, j);

  std::vector<std::vector<ld>> v(m);  // Householder vectors
  for (std::size_t c = 0; c < m; ++c) {
    ld alpha = 0;
    for (std::size_t r = c; r < n; ++r) alpha += w[c][r] * w[c][r];
    alpha = std::sqrt(alpha);
    if (w[c][c] > 0) alpha = -alpha;
    std::vector<ld> h(n, 0);
    for (std::size_t r = c; r < n; ++r) h[r] = w[c][r];
    h[c] -= alpha;
    ld hn = 0;
    for (std::size_t r = c; r < n; ++r) hn += h[r] * h[r];
    if (hn == 0) throw std::runtime_error("oracle: rank deficient");
    for (std::size_t cc = c; cc < m; ++cc) {
      ld s = 0;
      for (std::size_t r = c; r < n; ++r) s += h[r] * w[cc][r];
      s = 2 * s / hn;
      for (std::size_t r = c; r < n; ++r) w[cc][r] -= s * h[r];
    }
    v[c] = std::move(h);
  }
  // R is upper m x m: R(r, c) = w[c][r]. Solve R^T y = b (forward).
  std::vector<ld> y(m);
  for (std::size_t r = 0; r < m; ++r) {
    ld s = b[r];
    for (std::size_t p = 0; p < r; ++p) s -= w[r][p] * y[p];
    y[r] = s / w[r][r];
  }
  // x = Q [y; 0], Q = H_0 H_1 ... H_{m-1}
  std::vector<ld> x(n, 0);
  for (std::size_t r = 0; r < m; ++r) x[r] = y[r];
  for (std::size_t c = m; c-- > 0;) {
    const auto& h = v[c];
    ld hn = 0, s = 0;
    for (std::size_t r = c; r < n; ++r) {
      hn += h[r] * h[r];
      s += h[r] * x[r];
    }
    s = 2 * s / hn;
    for (std::size_t r = c; r < n; ++r) x[r] -= s * h[r];
  }
  return x;
}

/// Exact Gaussian elimination for small square rational systems.
inline std::vector<rational> solve_exact(std::vector<std::vector<rational>> a,
                                         std::vector<rational> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c].numerator() == 0) ++p;
    if (p == n) throw std::runtime_error("singular");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].numerator() == 0) continue;
      const rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return b;
}

inline double to_double(const rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

/// Dense Gaussian entries via Box-Muller over the counter RNG.
class gaussian_source {
public:
  explicit gaussian_source(std::uint64_t seed) : rng_(seed) {}

  double next() {
    const double u1 = 1.0 - rng_.next_unit();
    const double u2 = rng_.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.next_unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_.next_below(n)); }

  vector vec(std::size_t n) {
    vector v(n);
    for (double& x : v) x = next();
    return v;
  }

  matrix mat(std::size_t rows, std::size_t cols) {
    matrix a(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) a(i, j) = next();
    return a;
  }

private:
  counter_rng rng_;
};

/// Consistent random system with b = A z, z Gaussian.
inline linear_system random_consistent_system(gaussian_source& g, std::size_t m, std::size_t n) {
  matrix a = g.mat(m, n);
  const vector z = g.vec(n);
  vector b = a.multiply(z);
  return linear_system(std::move(a), std::move(b));
}

/// Component of v orthogonal to span(rows), by modified Gram-Schmidt in
/// extended precision.
inline std::vector<ld> orthogonal_residual(const std::vector<vector>& rows,
                                           std::span<const double> v) {
  std::vector<std::vector<ld>> basis;
  for (const auto& r : rows) {
    std::vector<ld> q(r.begin(), r.end());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) {
        ld s = 0;
        for (std::size_t j = 0; j < q.size(); ++j) s += e[j] * q[j];
        for (std::size_t j = 0; j < q.size(); ++j) q[j] -= s * e[j];
      }
    ld nq = 0;
    for (ld x : q) nq += x * x;
    nq = std::sqrt(nq);
    if (nq < 1e-12L) continue;
    for (ld& x : q) x /= nq;
    basis.push_back(std::move(q));
  }
  std::vector<ld> out(v.begin(), v.end());
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : basis) {
      ld s = 0;
      for (std::size_t j = 0; j < out.size(); ++j) s += e[j] * out[j];
      for (std::size_t j = 0; j < out.size(); ++j) out[j] -= s * e[j];
    }
  return out;
}

inline ld norm(const std::vector<ld>& v) {
  ld s = 0;
  for (ld x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace kaczmarz::oracle
