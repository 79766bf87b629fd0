#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kaczmarz/error.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/random.hpp"
#include "kaczmarz/state.hpp"

namespace kaczmarz {

// Row indices are zero-based throughout: row i here is row i+1 in the
// usual 1-based notation.

enum class control_kind { cyclic, random, max_residual, max_distance };

/// CLI spelling: cyclic | random | mr | mr-distance
inline std::string_view to_string(control_kind kind) noexcept {
  switch (kind) {
    case control_kind::cyclic: return "cyclic";
    case control_kind::random: return "random";
    case control_kind::max_residual: return "mr";
    case control_kind::max_distance: return "mr-distance";
  }
  return "unknown";
}

inline std::optional<control_kind> parse_control_kind(std::string_view name) noexcept {
  for (auto kind : {control_kind::cyclic, control_kind::random, control_kind::max_residual,
                    control_kind::max_distance})
    if (name == to_string(kind)) return kind;
  return std::nullopt;
}

// ----------------------------------------------------------------------------
// selection rules
// ----------------------------------------------------------------------------

/// argmax_i |r_i|, lowest index on ties.
inline std::size_t max_residual_index(std::span<const double> residual) {
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const double v = std::abs(residual[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

/// argmax_i |r_i| / ||A_i||, i.e. the hyperplane farthest from x. Compared
/// as r_i^2 / ||A_i||^2; lowest index on ties.
inline std::size_t max_distance_index(std::span<const double> residual,
                                      std::span<const double> row_norms_sq) {
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const double v = residual[i] * residual[i] / row_norms_sq[i];
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

/// Discrete distribution p_i = ||A_i||^2 / ||A||_F^2.
struct probability_weights {
  vector p;
  /// Running sums of the unnormalized masses; sampling inverts this.
  vector cumulative;
  double total = 0.0;

  static probability_weights from_masses(std::span<const double> masses) {
    probability_weights w;
    w.cumulative.resize(masses.size());
    double running = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      if (!(masses[i] >= 0.0))
        throw error(error_kind::invalid_argument, "negative probability mass");
      running += masses[i];
      w.cumulative[i] = running;
    }
    if (!(running > 0.0)) throw error(error_kind::invalid_argument, "probability masses sum to zero");
    w.total = running;
    w.p.resize(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) w.p[i] = masses[i] / running;
    return w;
  }

  /// Inverse CDF: first i with u * total < cumulative[i]. u in [0, 1).
  std::size_t sample(double u) const {
    const double target = u * total;
    std::size_t lo = 0;
    std::size_t hi = cumulative.size();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (target < cumulative[mid])
        hi = mid;
      else
        lo = mid + 1;
    }
    if (lo < cumulative.size()) return lo;
    // rounding pushed target to the top; take the last row with mass
    std::size_t i = cumulative.size() - 1;
    while (i > 0 && cumulative[i] == cumulative[i - 1]) --i;
    return i;
  }
};

inline probability_weights random_weights(const linear_system& system) {
  return probability_weights::from_masses(system.row_norms_sq());
}

// ----------------------------------------------------------------------------
// strategy
// ----------------------------------------------------------------------------

/// A control: maps the solver state to the next row index. Carries mutable
/// state (the RNG counter, cached weights), so an instance belongs to one
/// run on one system.
class control_strategy {
public:
  static control_strategy cyclic() { return control_strategy(control_kind::cyclic, 0); }
  static control_strategy random(std::uint64_t seed) {
    return control_strategy(control_kind::random, seed);
  }
  static control_strategy max_residual() { return control_strategy(control_kind::max_residual, 0); }
  static control_strategy max_distance() { return control_strategy(control_kind::max_distance, 0); }

  static control_strategy make(control_kind kind, std::uint64_t seed = 0) {
    return control_strategy(kind, seed);
  }

  control_kind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return rng_.seed(); }
  std::uint64_t draws() const noexcept { return rng_.counter(); }

  std::size_t select(const solver_state& state, const linear_system& system) {
    switch (kind_) {
      case control_kind::cyclic:
        return state.k % system.m();
      case control_kind::random:
        if (!weights_ || weights_->p.size() != system.m()) weights_ = random_weights(system);
        return weights_->sample(rng_.next_unit());
      case control_kind::max_residual:
        return max_residual_index(state.residual);
      case control_kind::max_distance:
        return max_distance_index(state.residual, system.row_norms_sq());
    }
    return 0;
  }

private:
  control_strategy(control_kind kind, std::uint64_t seed) : kind_(kind), rng_(seed) {}

  control_kind kind_;
  counter_rng rng_;
  std::optional<probability_weights> weights_;
};

inline std::size_t select(control_strategy& strategy, const solver_state& state,
                          const linear_system& system) {
  return strategy.select(state, system);
}

// ----------------------------------------------------------------------------
// control traces and windows
// ----------------------------------------------------------------------------

inline constexpr std::size_t not_hit = std::numeric_limits<std::size_t>::max();

/// The sequence i(0), i(1), ... and optionally window starts tau_0 < tau_1 < ...
struct control_trace {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> windows;
};

struct window_report {
  bool valid = true;
  std::optional<std::size_t> first_violation;
  /// rows absent from window *first_violation
  std::vector<std::size_t> missing;
  /// C_k = tau_{k+1} - tau_k
  std::vector<std::size_t> lengths;
  std::size_t max_length = 0;
  /// set only when a length bound was supplied
  std::optional<bool> bounded;
};

/// tau_k = k * m for every full cycle that fits in the trace.
inline std::vector<std::size_t> cyclic_windows(std::size_t trace_length, std::size_t m) {
  std::vector<std::size_t> tau;
  if (m == 0) return tau;
  for (std::size_t t = 0; t <= trace_length; t += m) tau.push_back(t);
  return tau;
}

inline void check_trace_indices(std::span<const std::size_t> indices, std::size_t m) {
  for (std::size_t t = 0; t < indices.size(); ++t)
    if (indices[t] >= m)
      throw error(error_kind::invalid_argument, "trace entry " + std::to_string(t) + " is row " +
                                                    std::to_string(indices[t]) + ", but m = " +
                                                    std::to_string(m));
}

/// Checks that every row 0..m-1 occurs inside each window [tau_k, tau_{k+1}).
/// Stops scanning at the first violating window but still reports all
/// lengths. When `length_bound` is given, also reports whether every C_k
/// stays within it.
inline window_report verify_windows(const control_trace& trace, std::size_t m,
                                    std::optional<std::size_t> length_bound = std::nullopt) {
  if (m == 0) throw error(error_kind::invalid_argument, "m must be positive");
  const auto& tau = trace.windows;
  if (tau.size() < 2)
    throw error(error_kind::malformed_windows, "need at least two window boundaries");
  for (std::size_t k = 0; k + 1 < tau.size(); ++k)
    if (tau[k + 1] <= tau[k])
      throw error(error_kind::malformed_windows,
                  "window boundaries not strictly increasing at k = " + std::to_string(k));
  if (tau.back() > trace.indices.size())
    throw error(error_kind::malformed_windows,
                "last boundary " + std::to_string(tau.back()) + " exceeds trace length " +
                    std::to_string(trace.indices.size()));
  check_trace_indices(trace.indices, m);

  window_report report;
  std::vector<char> seen(m);
  for (std::size_t k = 0; k + 1 < tau.size(); ++k) {
    const std::size_t len = tau[k + 1] - tau[k];
    report.lengths.push_back(len);
    report.max_length = std::max(report.max_length, len);
    if (!report.valid) continue;

    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t t = tau[k]; t < tau[k + 1]; ++t) seen[trace.indices[t]] = 1;
    for (std::size_t i = 0; i < m; ++i)
      if (!seen[i]) report.missing.push_back(i);
    if (!report.missing.empty()) {
      report.valid = false;
      report.first_violation = k;
    }
  }
  if (length_bound) report.bounded = report.max_length <= *length_bound;
  return report;
}

/// Entry i is the first t with i(t) = i, or not_hit.
inline std::vector<std::size_t> first_hit_iterations(std::span<const std::size_t> indices,
                                                     std::size_t m) {
  check_trace_indices(indices, m);
  std::vector<std::size_t> first(m, not_hit);
  for (std::size_t t = 0; t < indices.size(); ++t)
    if (first[indices[t]] == not_hit) first[indices[t]] = t;
  return first;
}

inline std::vector<std::size_t> first_hit_iterations(const control_trace& trace, std::size_t m) {
  return first_hit_iterations(trace.indices, m);
}

}  // namespace kaczmarz
