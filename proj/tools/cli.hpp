#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kaczmarz/kaczmarz.hpp"

namespace kaczmarz::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verification_failed = 1;
inline constexpr int usage = 2;
inline constexpr int generation_failed = 3;
inline constexpr int rank_deficient = 4;
inline constexpr int assumption_violated = 5;
inline constexpr int malformed_windows = 6;
}  // namespace exit_code

using json = nlohmann::ordered_json;

inline int exit_code_for(error_kind kind) {
  switch (kind) {
    case error_kind::rank_retry_exhausted: return exit_code::generation_failed;
    case error_kind::rank_deficient: return exit_code::rank_deficient;
    case error_kind::assumption_violated:
    case error_kind::bound_too_small: return exit_code::assumption_violated;
    case error_kind::malformed_windows: return exit_code::malformed_windows;
    default: return exit_code::usage;
  }
}

/// Diagnostics on stderr, enabled by KACZMARZ_LOG=info|debug.
class logger {
public:
  enum class level { off, info, debug };

  explicit logger(std::ostream& err) : err_(&err) {
    if (const char* env = std::getenv("KACZMARZ_LOG")) {
      const std::string_view v(env);
      if (v == "debug") level_ = level::debug;
      else if (v == "info") level_ = level::info;
    }
  }

  void info(const std::string& msg) const {
    if (level_ >= level::info) *err_ << "[info] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= level::debug) *err_ << "[debug] " << msg << '\n';
  }

private:
  std::ostream* err_;
  level level_ = level::off;
};

namespace detail {

inline json optional_index(std::size_t v) { return v == not_hit ? json(nullptr) : json(v); }

inline json first_hit_json(const std::vector<std::size_t>& first_hit) {
  json out = json::array();
  for (auto v : first_hit) out.push_back(optional_index(v));
  return out;
}

inline json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json assumption_json(const matrix_assumption_report& r) {
  json neg = json::array();
  for (auto [i, j] : r.negative_entries) neg.push_back({i, j});
  return {
      {"m_le_n", r.m_le_n},
      {"full_row_rank", r.full_row_rank},
      {"rank", r.rank},
      {"dependent_rows", r.dependent_rows},
      {"nonnegative", r.nonnegative},
      {"negative_entries", neg},
      {"no_zero_rows", r.no_zero_rows},
      {"zero_rows", r.zero_rows},
  };
}

inline json hypothesis_json(const hypothesis_report& r) {
  return {
      {"gamma", r.gamma},
      {"all_positive", r.all_positive},
      {"min_gamma", r.min_gamma},
      {"pos_tol", r.pos_tol},
      {"decomposition_residual", r.decomposition_residual},
  };
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = io::detail::open_out(path);
  out << text;
}

inline std::string pass_fail(bool v) { return v ? "pass" : "FAIL"; }

}  // namespace detail

// ----------------------------------------------------------------------------
// generate
// ----------------------------------------------------------------------------

struct generate_options {
  generator_config config;
  std::string out_dir;
};

inline int cmd_generate(const generate_options& opt, std::ostream& out, const logger& log) {
  opt.config.validate();
  log.info("generating m=" + std::to_string(opt.config.m) + " n=" + std::to_string(opt.config.n) +
           " seed=" + std::to_string(opt.config.seed));
  const auto problem = generate_ct_like(opt.config);

  const std::filesystem::path dir(opt.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw error(error_kind::io_error, "cannot create '" + dir.string() + "'");
  io::save_matrix(dir / "A.mtx", problem.system.a());
  io::save_vector(dir / "b.txt", problem.system.b());
  io::save_vector(dir / "z.txt", problem.z);

  const auto r = check_matrix_assumptions(problem.system);
  out << "m <= n:          " << detail::pass_fail(r.m_le_n) << '\n'
      << "full row rank:   " << detail::pass_fail(r.full_row_rank) << " (rank " << r.rank << ")\n"
      << "nonnegative:     " << detail::pass_fail(r.nonnegative) << '\n'
      << "no zero rows:    " << detail::pass_fail(r.no_zero_rows) << '\n';
  return exit_code::ok;
}

// ----------------------------------------------------------------------------
// solve
// ----------------------------------------------------------------------------

struct solve_options {
  std::string matrix_path;
  std::string rhs_path;
  std::string x0 = "zero";
  bool x0_prop2 = false;
  std::optional<double> bound;
  std::optional<double> box;
  double delta = 0.1;
  std::string strategy = "mr";
  std::uint64_t seed = 0;
  double stop_tol = 1e-10;
  std::size_t max_iters = 100000;
  std::string residual_mode = "auto";
  std::size_t resync_interval = 10000;
  bool allow_rank_deficient = false;
  std::string trace_path;
  std::string summary_path;
};

inline residual_mode parse_residual_mode(const std::string& s) {
  if (s == "auto") return residual_mode::automatic;
  if (s == "incremental") return residual_mode::incremental;
  if (s == "recompute") return residual_mode::recompute;
  throw error(error_kind::invalid_argument, "unknown residual mode '" + s + "'");
}

inline std::string_view to_string(residual_mode mode) {
  switch (mode) {
    case residual_mode::automatic: return "auto";
    case residual_mode::incremental: return "incremental";
    case residual_mode::recompute: return "recompute";
  }
  return "unknown";
}

inline int cmd_solve(const solve_options& opt, std::ostream& out, const logger& log) {
  const auto kind = parse_control_kind(opt.strategy);
  if (!kind) throw error(error_kind::invalid_argument, "unknown strategy '" + opt.strategy + "'");

  linear_system system(io::load_matrix(opt.matrix_path), io::load_vector(opt.rhs_path));
  log.info("loaded system m=" + std::to_string(system.m()) + " n=" + std::to_string(system.n()));

  std::optional<vector> limit;
  std::optional<hypothesis_report> hypothesis;
  std::optional<initializer_spec> init;
  vector x0(system.n(), 0.0);

  if (opt.x0_prop2) {
    const double bound = opt.bound ? *opt.bound : bound_from_box(system.n(), *opt.box);
    init = construct_x0(system, bound, opt.delta);
    x0 = init->x0;
    hypothesis = check_hypothesis(system, x0);
  } else if (opt.x0 != "zero") {
    x0 = io::load_vector(opt.x0);
    if (x0.size() != system.n())
      throw error(error_kind::dimension_mismatch, "x0 has length " + std::to_string(x0.size()) +
                                                      ", expected " + std::to_string(system.n()));
  }

  try {
    limit = predicted_limit(system, x0);
  } catch (const error& e) {
    if (e.kind() != error_kind::rank_deficient || !opt.allow_rank_deficient) throw;
    log.info("rank-deficient system: distance-to-limit disabled");
  }

  run_config config;
  config.max_iters = opt.max_iters;
  config.stop_tol = opt.stop_tol;
  config.strategy = control_strategy::make(*kind, opt.seed);
  config.record_trace = !opt.trace_path.empty();
  config.mode = parse_residual_mode(opt.residual_mode);
  config.resync_interval = opt.resync_interval;
  config.limit = limit;

  const run_trace trace = run(system, x0, config);
  const coverage_summary cov = coverage_report(trace);
  log.debug("iterations=" + std::to_string(trace.iterations));

  if (!opt.trace_path.empty()) {
    auto f = io::detail::open_out(opt.trace_path);
    io::write_trace_csv(f, trace);
  }

  json summary;
  summary["schema"] = 1;
  summary["m"] = system.m();
  summary["n"] = system.n();
  summary["strategy"] = std::string(to_string(*kind));
  summary["seed"] = opt.seed;
  summary["residual_mode"] = std::string(to_string(trace.mode_used));
  summary["stop_tol"] = opt.stop_tol;
  summary["max_iters"] = opt.max_iters;
  summary["converged"] = trace.converged;
  summary["iterations"] = trace.iterations;
  summary["final_max_abs_res"] = trace.final_max_abs_res;
  summary["first_hit"] = detail::first_hit_json(trace.first_hit);
  summary["covered"] = cov.covered;
  // an unhit row after a finite budget says nothing about later iterations
  summary["coverage"] = cov.covered ? "covered" : "inconclusive";
  summary["max_first_hit"] = cov.max_first_hit ? json(*cov.max_first_hit) : json(nullptr);
  summary["unhit"] = cov.unhit;
  summary["dist_to_limit_start"] = detail::optional_number(trace.dist_to_limit_start);
  summary["dist_to_limit_end"] = detail::optional_number(trace.dist_to_limit_end);
  summary["matrix_assumptions"] = detail::assumption_json(check_matrix_assumptions(system));
  if (init) {
    summary["initializer"] = {
        {"M", init->bound}, {"delta", init->delta}, {"row_max", init->row_max}, {"beta", init->beta}};
  }
  if (hypothesis) summary["hypothesis"] = detail::hypothesis_json(*hypothesis);

  const std::string text = summary.dump(2) + "\n";
  if (opt.summary_path.empty()) {
    out << text;
  } else {
    detail::write_text(opt.summary_path, text);
    out << (trace.converged ? "converged" : "not converged") << " after " << trace.iterations
        << " iterations; coverage " << (cov.covered ? "covered" : "inconclusive") << '\n';
  }
  return exit_code::ok;
}

// ----------------------------------------------------------------------------
// verify-control
// ----------------------------------------------------------------------------

struct verify_options {
  std::string trace_path;
  std::size_t m = 0;
  std::string windows = "auto-cyclic";
  std::optional<std::size_t> bound;
};

inline int cmd_verify_control(const verify_options& opt, std::ostream& out, const logger& log) {
  if (opt.m == 0) throw error(error_kind::invalid_argument, "--m must be >= 1");
  control_trace trace;
  trace.indices = io::load_trace_indices(opt.trace_path);

  std::optional<std::size_t> bound = opt.bound;
  if (opt.windows == "auto-cyclic") {
    trace.windows = cyclic_windows(trace.indices.size(), opt.m);
    if (!bound) bound = opt.m;
  } else {
    try {
      trace.windows = io::load_windows(opt.windows);
    } catch (const error& e) {
      throw error(error_kind::malformed_windows, e.what());
    }
  }
  log.debug("trace length " + std::to_string(trace.indices.size()) + ", " +
            std::to_string(trace.windows.size()) + " boundaries");

  const window_report r = verify_windows(trace, opt.m, bound);
  out << "windows: " << r.lengths.size() << '\n';
  out << "valid: " << (r.valid ? "true" : "false") << '\n';
  if (!r.valid) {
    out << "first_violation_window: " << *r.first_violation << '\n';
    out << "missing:";
    for (auto i : r.missing) out << ' ' << i;
    out << '\n';
  }
  out << "max_window_length: " << r.max_length << '\n';
  if (r.bounded) {
    out << "classification: "
        << (*r.bounded ? "bounded (C_k <= " : "exceeds bound (C_k > ") << *bound << ")\n";
  }
  return r.valid ? exit_code::ok : exit_code::verification_failed;
}

// ----------------------------------------------------------------------------
// sweep
// ----------------------------------------------------------------------------

struct sweep_options {
  generator_config config;
  std::size_t repeat = 1;
  std::size_t parallel = 1;
  std::string strategy = "mr";
  double delta = 0.1;
  double stop_tol = 1e-10;
  std::size_t max_iters = 50000;
  std::string out_path;
};

/// Generated problem -> constructed x0 -> hypothesis check -> run, per seed.
inline json sweep_one(const sweep_options& opt, control_kind kind, std::uint64_t seed) {
  json row;
  row["seed"] = seed;
  try {
    generator_config cfg = opt.config;
    cfg.seed = seed;
    const auto problem = generate_ct_like(cfg);
    const auto& system = problem.system;
    const auto init = construct_x0(system, bound_from_box(system.n(), cfg.c), opt.delta);
    const auto hyp = check_hypothesis(system, init.x0);
    const vector limit = predicted_limit(system, init.x0);

    run_config rc;
    rc.max_iters = opt.max_iters;
    rc.stop_tol = opt.stop_tol;
    rc.strategy = control_strategy::make(kind, seed);
    const auto trace = run(system, init.x0, rc);
    const auto cov = coverage_report(trace);

    row["all_positive"] = hyp.all_positive;
    row["min_gamma"] = hyp.min_gamma;
    row["converged"] = trace.converged;
    row["iterations"] = trace.iterations;
    row["covered"] = cov.covered;
    row["coverage"] = cov.covered ? "covered" : "inconclusive";
    row["max_first_hit"] = cov.max_first_hit ? json(*cov.max_first_hit) : json(nullptr);
    row["unhit"] = cov.unhit;
    row["final_max_abs_res"] = trace.final_max_abs_res;
    row["limit_error"] = distance(trace.final_x, limit);
  } catch (const error& e) {
    row["error"] = e.what();
  }
  return row;
}

inline int cmd_sweep(const sweep_options& opt, std::ostream& out, const logger& log) {
  const auto kind = parse_control_kind(opt.strategy);
  if (!kind) throw error(error_kind::invalid_argument, "unknown strategy '" + opt.strategy + "'");
  opt.config.validate();
  if (opt.repeat == 0) throw error(error_kind::invalid_argument, "--repeat must be >= 1");

  std::vector<json> rows(opt.repeat);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < opt.repeat; r = next++)
      rows[r] = sweep_one(opt, *kind, opt.config.seed + r);
  };
  const std::size_t threads = std::clamp<std::size_t>(opt.parallel, 1, opt.repeat);
  log.info("sweep of " + std::to_string(opt.repeat) + " seeds on " + std::to_string(threads) +
           " threads");
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::size_t hyp_ok = 0, covered = 0, converged = 0, failures = 0;
  std::vector<std::size_t> first_hits;
  for (const auto& row : rows) {
    if (row.contains("error")) {
      ++failures;
      continue;
    }
    hyp_ok += row["all_positive"].get<bool>();
    covered += row["covered"].get<bool>();
    converged += row["converged"].get<bool>();
    if (!row["max_first_hit"].is_null()) first_hits.push_back(row["max_first_hit"].get<std::size_t>());
  }
  std::sort(first_hits.begin(), first_hits.end());

  json doc;
  doc["schema"] = 1;
  doc["m"] = opt.config.m;
  doc["n"] = opt.config.n;
  doc["density"] = opt.config.density;
  doc["C"] = opt.config.c;
  doc["seed_begin"] = opt.config.seed;
  doc["repeat"] = opt.repeat;
  doc["strategy"] = std::string(to_string(*kind));
  doc["delta"] = opt.delta;
  doc["stop_tol"] = opt.stop_tol;
  doc["max_iters"] = opt.max_iters;
  doc["aggregate"] = {
      {"hypothesis_all_positive", hyp_ok},
      {"covered", covered},
      {"converged", converged},
      {"errors", failures},
      {"max_first_hit_min", first_hits.empty() ? json(nullptr) : json(first_hits.front())},
      {"max_first_hit_median",
       first_hits.empty() ? json(nullptr) : json(first_hits[first_hits.size() / 2])},
      {"max_first_hit_max", first_hits.empty() ? json(nullptr) : json(first_hits.back())},
  };
  doc["runs"] = rows;

  const std::string text = doc.dump(2) + "\n";
  if (opt.out_path.empty()) {
    out << text;
  } else {
    detail::write_text(opt.out_path, text);
    out << "hypothesis " << hyp_ok << "/" << opt.repeat << ", covered " << covered << "/"
        << opt.repeat << ", converged " << converged << "/" << opt.repeat << '\n';
  }
  return failures == 0 ? exit_code::ok : exit_code::verification_failed;
}

// ----------------------------------------------------------------------------
// entry point
// ----------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Kaczmarz row-action solver with cyclic, random and maximal-residual controls"};
  app.require_subcommand(1);

  generate_options gen;
  auto* generate = app.add_subcommand("generate", "generate a nonnegative sparse test system");
  generate->add_option("--m", gen.config.m, "rows")->required();
  generate->add_option("--n", gen.config.n, "columns")->required();
  generate->add_option("--density", gen.config.density, "nonzero fraction per row")
      ->capture_default_str();
  generate->add_option("--C", gen.config.c, "box bound on the planted solution")
      ->capture_default_str();
  generate->add_option("--seed", gen.config.seed)->capture_default_str();
  generate->add_option("--out-dir", gen.out_dir, "writes A.mtx, b.txt, z.txt")->required();

  solve_options sol;
  auto* solve = app.add_subcommand("solve", "run the Kaczmarz iteration");
  solve->add_option("--matrix", sol.matrix_path, "MatrixMarket file")->required();
  solve->add_option("--rhs", sol.rhs_path, "one value per line")->required();
  auto* x0_opt = solve->add_option("--x0", sol.x0, "start vector file, or 'zero'");
  auto* prop2 = solve->add_flag("--x0-prop2", sol.x0_prop2,
                                "start from x0 = A^T beta, beta_i = (1+delta) M / max_j A_ij");
  x0_opt->excludes(prop2);
  auto* bound_opt = solve->add_option("--M", sol.bound, "bound on ||x_LS||");
  auto* box_opt = solve->add_option("--C", sol.box, "solution box bound; M = sqrt(n) C");
  bound_opt->excludes(box_opt);
  solve->add_option("--delta", sol.delta)->capture_default_str();
  solve->add_option("--strategy", sol.strategy)
      ->check(CLI::IsMember({"cyclic", "random", "mr", "mr-distance"}))
      ->capture_default_str();
  solve->add_option("--seed", sol.seed)->capture_default_str();
  solve->add_option("--stop-tol", sol.stop_tol)->capture_default_str();
  solve->add_option("--max-iters", sol.max_iters)->capture_default_str();
  solve->add_option("--residual-mode", sol.residual_mode)
      ->check(CLI::IsMember({"auto", "incremental", "recompute"}))
      ->capture_default_str();
  solve->add_option("--resync-interval", sol.resync_interval)->capture_default_str();
  solve->add_flag("--allow-rank-deficient", sol.allow_rank_deficient,
                  "run without the limit oracle when rank(A) < m");
  solve->add_option("--trace", sol.trace_path, "per-iteration CSV");
  solve->add_option("--summary", sol.summary_path, "summary JSON (stdout if omitted)");

  verify_options ver;
  auto* verify = app.add_subcommand("verify-control", "check a control trace against windows");
  verify->add_option("--trace", ver.trace_path, "trace CSV with an 'index' column")->required();
  verify->add_option("--m", ver.m, "number of rows")->required();
  verify->add_option("--windows", ver.windows, "boundary file, or 'auto-cyclic'")
      ->capture_default_str();
  verify->add_option("--bound", ver.bound, "window length bound for the bounded check");

  sweep_options swp;
  auto* sweep = app.add_subcommand("sweep", "generate, initialize and solve over a seed range");
  sweep->add_option("--m", swp.config.m)->capture_default_str();
  sweep->add_option("--n", swp.config.n)->capture_default_str();
  sweep->add_option("--density", swp.config.density)->capture_default_str();
  sweep->add_option("--C", swp.config.c)->capture_default_str();
  sweep->add_option("--seed", swp.config.seed, "first seed")->capture_default_str();
  sweep->add_option("--repeat", swp.repeat, "number of seeds")->capture_default_str();
  sweep->add_option("--parallel", swp.parallel, "worker threads")->capture_default_str();
  sweep->add_option("--strategy", swp.strategy)
      ->check(CLI::IsMember({"cyclic", "random", "mr", "mr-distance"}))
      ->capture_default_str();
  sweep->add_option("--delta", swp.delta)->capture_default_str();
  sweep->add_option("--stop-tol", swp.stop_tol)->capture_default_str();
  sweep->add_option("--max-iters", swp.max_iters)->capture_default_str();
  sweep->add_option("--out", swp.out_path, "results JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  const logger log(err);
  try {
    if (*generate) return cmd_generate(gen, out, log);
    if (*solve) {
      if (sol.x0_prop2 && !sol.bound && !sol.box) {
        err << "--x0-prop2 needs --M or --C\n";
        return exit_code::usage;
      }
      return cmd_solve(sol, out, log);
    }
    if (*verify) return cmd_verify_control(ver, out, log);
    if (*sweep) return cmd_sweep(swp, out, log);
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return exit_code::usage;
}

}  // namespace kaczmarz::cli
