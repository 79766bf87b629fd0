#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "kaczmarz/controls.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/state.hpp"

namespace kaczmarz {

enum class residual_mode {
  /// incremental when m <= run_config::incremental_max_rows, else recompute
  automatic,
  recompute,
  incremental,
};

struct run_config {
  /// 0 is allowed: the run then only tests the starting point.
  std::size_t max_iters = 100000;
  /// stop when max_i |r_i| <= stop_tol
  double stop_tol = 1e-10;
  control_strategy strategy = control_strategy::max_residual();
  bool record_trace = false;
  residual_mode mode = residual_mode::automatic;
  std::size_t incremental_max_rows = 2000;
  /// full residual recompute every this many incremental steps (0 = never)
  std::size_t resync_interval = 10000;
  /// reference point for the distance-to-limit column, normally predicted_limit()
  std::optional<vector> limit;
};

struct iteration_record {
  std::size_t k = 0;
  std::size_t index = 0;
  /// both measured at x^k, before the projection onto row `index`
  double max_abs_res = 0.0;
  double res_norm2 = 0.0;
  std::optional<double> dist_to_limit;
};

struct run_trace {
  std::size_t m = 0;
  /// populated only when record_trace is set
  control_trace control;
  std::vector<iteration_record> records;
  /// always maintained; equals first_hit_iterations(control, m) when recorded
  std::vector<std::size_t> first_hit;
  bool converged = false;
  std::size_t iterations = 0;
  double final_max_abs_res = 0.0;
  vector final_x;
  residual_mode mode_used = residual_mode::recompute;
  std::optional<double> dist_to_limit_start;
  std::optional<double> dist_to_limit_end;
};

template <typename S>
concept row_selector = requires(S& s, const solver_state& state, const linear_system& system) {
  { s.select(state, system) } -> std::convertible_to<std::size_t>;
};

// ----------------------------------------------------------------------------
// projection step
// ----------------------------------------------------------------------------

namespace detail {

/// x <- P_{H_i}(x); returns lambda = (<x, A_i> - b_i) / ||A_i||^2.
inline double project_onto_row(vector& x, const linear_system& system, std::size_t i) {
  const auto a = system.row(i);
  const double lambda = (dot(x, a) - system.rhs(i)) / system.row_norm_sq(i);
  axpy(-lambda, a, x);
  return lambda;
}

}  // namespace detail

/// One Kaczmarz projection onto the hyperplane <x, A_i> = b_i, with the
/// residual recomputed from scratch afterwards.
inline void kaczmarz_step(solver_state& state, const linear_system& system, std::size_t i) {
  detail::project_onto_row(state.x, system, i);
  ++state.k;
  state.resync(system);
}

/// Same projection; the residual is updated as r <- r - lambda (A A^T)_{:,i}.
inline void kaczmarz_step(solver_state& state, const linear_system& system, std::size_t i,
                          const matrix& gram) {
  const double lambda = detail::project_onto_row(state.x, system, i);
  ++state.k;
  axpy(-lambda, gram.row(i), state.residual);
}

// ----------------------------------------------------------------------------
// driver
// ----------------------------------------------------------------------------

template <row_selector Selector>
run_trace run(const linear_system& system, std::span<const double> x0, const run_config& config,
              Selector& selector) {
  if (!(config.stop_tol >= 0.0)) throw error(error_kind::invalid_argument, "stop_tol must be >= 0");
  if (config.limit && config.limit->size() != system.n())
    throw error(error_kind::dimension_mismatch, "limit has wrong length");

  const std::size_t m = system.m();
  run_trace trace;
  trace.m = m;
  trace.first_hit.assign(m, not_hit);
  trace.mode_used = config.mode;
  if (config.mode == residual_mode::automatic)
    trace.mode_used =
        m <= config.incremental_max_rows ? residual_mode::incremental : residual_mode::recompute;
  const bool incremental = trace.mode_used == residual_mode::incremental;

  solver_state state(system, x0);
  matrix gram;
  if (incremental) gram = gram_matrix(system.a());

  auto dist = [&]() -> std::optional<double> {
    if (!config.limit) return std::nullopt;
    return distance(state.x, *config.limit);
  };
  trace.dist_to_limit_start = dist();

  while (true) {
    double max_abs = norm_inf(state.residual);
    if (max_abs <= config.stop_tol && incremental) {
      // confirm against the true residual before stopping
      state.resync(system);
      max_abs = norm_inf(state.residual);
    }
    if (max_abs <= config.stop_tol) {
      trace.converged = true;
      break;
    }
    if (state.k >= config.max_iters) break;

    const std::size_t i = static_cast<std::size_t>(selector.select(state, system));
    if (i >= m) throw error(error_kind::invalid_argument, "selector returned an out-of-range row");

    if (config.record_trace) {
      trace.control.indices.push_back(i);
      trace.records.push_back({state.k, i, max_abs, norm2(state.residual), dist()});
    }
    if (trace.first_hit[i] == not_hit) trace.first_hit[i] = state.k;

    if (incremental) {
      kaczmarz_step(state, system, i, gram);
      if (config.resync_interval > 0 && state.k % config.resync_interval == 0)
        state.resync(system);
    } else {
      kaczmarz_step(state, system, i);
    }
  }

  trace.iterations = state.k;
  trace.final_max_abs_res = norm_inf(state.residual);
  trace.dist_to_limit_end = dist();
  trace.final_x = std::move(state.x);
  return trace;
}

inline run_trace run(const linear_system& system, std::span<const double> x0, run_config config) {
  control_strategy strategy = config.strategy;
  return run(system, x0, config, strategy);
}

/// Limit of the iteration from x0 on a consistent full-row-rank system:
/// P_N(A)(x0) + x_LS.
inline vector predicted_limit(const linear_system& system, std::span<const double> x0,
                              const tolerances& tol = {}) {
  const row_space rs(system, tol);
  return add(rs.project_null(x0), rs.min_norm_solution());
}

// ----------------------------------------------------------------------------
// coverage
// ----------------------------------------------------------------------------

struct coverage_summary {
  bool covered = false;
  /// largest first-hit iteration; empty when nothing was hit
  std::optional<std::size_t> max_first_hit;
  std::vector<std::size_t> unhit;
};

inline coverage_summary coverage_report(std::span<const std::size_t> first_hit) {
  if (first_hit.empty()) throw error(error_kind::invalid_argument, "coverage needs m >= 1");
  coverage_summary out;
  for (std::size_t i = 0; i < first_hit.size(); ++i) {
    if (first_hit[i] == not_hit) {
      out.unhit.push_back(i);
    } else {
      out.max_first_hit = std::max(out.max_first_hit.value_or(0), first_hit[i]);
    }
  }
  out.covered = out.unhit.empty();
  return out;
}

inline coverage_summary coverage_report(const run_trace& trace) {
  return coverage_report(trace.first_hit);
}

}  // namespace kaczmarz
