#include <gtest/gtest.h>

#include "kaczmarz/solver.hpp"
#include "oracles.hpp"

using namespace kaczmarz;
using oracle::rational;

namespace {

linear_system make(const std::vector<vector>& rows, vector b) {
  return linear_system(matrix::from_rows(rows), std::move(b));
}

run_config config_for(control_strategy s, double stop_tol = 1e-10, std::size_t max_iters = 100000) {
  run_config c;
  c.strategy = s;
  c.stop_tol = stop_tol;
  c.max_iters = max_iters;
  c.record_trace = true;
  return c;
}

}  // namespace

TEST(KaczmarzStep, Examples) {
  {
    const auto s = make({{1, 0}}, {1});
    solver_state st(s, vector{0, 0});
    kaczmarz_step(st, s, 0);
    EXPECT_EQ(st.x, (vector{1, 0}));
    EXPECT_EQ(st.k, 1u);
    EXPECT_EQ(st.residual, vector{0});
  }
  {
    const auto s = make({{1, 0}}, {1});
    solver_state st(s, vector{1, 0});
    kaczmarz_step(st, s, 0);
    EXPECT_EQ(st.x, (vector{1, 0}));
  }
  {
    // exact: factor = (<x,a> - b) / ||a||^2 = (0 - 2) / 2, x' = x - factor * a
    const rational factor = rational(0 - 2, 2);
    const rational x0 = rational(0) - factor * 1, x1 = rational(0) - factor * 1;
    const auto s = make({{1, 1}}, {2});
    solver_state st(s, vector{0, 0});
    kaczmarz_step(st, s, 0);
    EXPECT_EQ(st.x[0], oracle::to_double(x0));
    EXPECT_EQ(st.x[1], oracle::to_double(x1));
    EXPECT_EQ(st.x, (vector{1, 1}));
  }
}

TEST(KaczmarzStep, IncrementalResidualMatchesRecompute) {
  oracle::gaussian_source g(8);
  const auto s = oracle::random_consistent_system(g, 6, 10);
  const matrix gram = gram_matrix(s.a());
  solver_state a(s, g.vec(10)), b = a;
  for (std::size_t t = 0; t < 50; ++t) {
    const std::size_t i = g.below(6);
    kaczmarz_step(a, s, i);
    kaczmarz_step(b, s, i, gram);
    EXPECT_EQ(a.x, b.x);
    EXPECT_LE(distance(a.residual, b.residual), 1e-12 * (1 + norm2(s.b())));
  }
}

TEST(Run, IdentityUnderMaxResidual) {
  const auto s = make({{1, 0}, {0, 1}}, {1, 2});
  const auto t = run(s, vector{0, 0}, config_for(control_strategy::max_residual(), 1e-12));
  EXPECT_TRUE(t.converged);
  EXPECT_EQ(t.iterations, 2u);
  EXPECT_EQ(t.final_x, (vector{1, 2}));
  EXPECT_EQ(t.control.indices, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(t.first_hit, (std::vector<std::size_t>{1, 0}));
  ASSERT_EQ(t.records.size(), 2u);
  EXPECT_EQ(t.records[0].max_abs_res, 2.0);
  EXPECT_EQ(t.records[1].max_abs_res, 1.0);
}

TEST(Run, StartingAtSolution) {
  const auto s = make({{1, 0}, {0, 1}}, {0, 0});
  for (auto strat : {control_strategy::cyclic(), control_strategy::random(1),
                     control_strategy::max_residual(), control_strategy::max_distance()}) {
    const auto t = run(s, vector{0, 0}, config_for(strat));
    EXPECT_TRUE(t.converged);
    EXPECT_EQ(t.iterations, 0u);
    EXPECT_EQ(t.final_x, (vector{0, 0}));
    EXPECT_FALSE(coverage_report(t).covered);
  }
}

TEST(Run, SingleHyperplane) {
  const auto s = make({{1, 1}}, {2});
  const auto t = run(s, vector{1, 0}, config_for(control_strategy::max_residual()));
  EXPECT_TRUE(t.converged);
  EXPECT_EQ(t.iterations, 1u);
  EXPECT_EQ(t.final_x, (vector{1.5, 0.5}));
}

TEST(Run, ZeroIterationBudget) {
  const auto s = make({{1, 0}, {0, 1}}, {1, 2});
  const auto t = run(s, vector{0, 0}, config_for(control_strategy::max_residual(), 1e-10, 0));
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.iterations, 0u);
  EXPECT_EQ(t.final_x, (vector{0, 0}));
}

TEST(Run, CustomSelectorThroughConcept) {
  struct always_last {
    std::size_t select(const solver_state&, const linear_system& s) const { return s.m() - 1; }
  };
  static_assert(row_selector<always_last>);
  const auto s = make({{1, 0}, {0, 1}}, {1, 2});
  always_last sel;
  run_config c;
  c.max_iters = 5;
  c.record_trace = true;
  const auto t = run(s, vector{0, 0}, c, sel);
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.iterations, 5u);
  EXPECT_EQ(t.first_hit[0], not_hit);
}

TEST(PredictedLimit, Examples) {
  const auto id = make({{1, 0}, {0, 1}}, {1, 2});
  EXPECT_EQ(predicted_limit(id, vector{7, -3}), (vector{1, 2}));

  const auto s = make({{1, 1}}, {2});
  const vector l = predicted_limit(s, vector{1, 0});
  EXPECT_NEAR(l[0], 1.5, 1e-15);
  EXPECT_NEAR(l[1], 0.5, 1e-15);
  EXPECT_NEAR(dot(s.row(0), l), 2.0, 1e-15);
  const vector l0 = predicted_limit(s, vector{0, 0});
  EXPECT_NEAR(l0[0], 1.0, 1e-15);
  EXPECT_NEAR(l0[1], 1.0, 1e-15);
}

TEST(Coverage, Examples) {
  auto c = coverage_report(std::vector<std::size_t>{1, 0});
  EXPECT_TRUE(c.covered);
  EXPECT_EQ(c.max_first_hit, 1u);

  c = coverage_report(std::vector<std::size_t>{0, not_hit});
  EXPECT_FALSE(c.covered);
  EXPECT_EQ(c.unhit, std::vector<std::size_t>{1});

  EXPECT_THROW(coverage_report(std::vector<std::size_t>{}), error);
}

TEST(RunProperties, PythagoreanAndDistanceMonotone) {
  oracle::gaussian_source g(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_consistent_system(g, 8, 15);
    const vector x0 = g.vec(15);
    const vector limit = predicted_limit(s, x0);
    for (auto strat : {control_strategy::cyclic(), control_strategy::random(trial),
                       control_strategy::max_residual(), control_strategy::max_distance()}) {
      solver_state st(s, x0);
      double prev = distance(st.x, limit);
      for (int k = 0; k < 200; ++k) {
        const std::size_t i = strat.select(st, s);
        const double r = dot(st.x, s.row(i)) - s.rhs(i);
        const double before = prev * prev;
        kaczmarz_step(st, s, i);
        const double d = distance(st.x, limit);
        EXPECT_NEAR(d * d, before - r * r / s.row_norm_sq(i), 1e-10 * (1 + before));
        EXPECT_LE(d, prev + 1e-12);
        EXPECT_LE(std::abs(dot(st.x, s.row(i)) - s.rhs(i)), 1e-12 * (1 + std::abs(s.rhs(i))));
        prev = d;
      }
    }
  }
}

TEST(RunProperties, IterateStaysInSpanOfSelectedRows) {
  oracle::gaussian_source g(123);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = oracle::random_consistent_system(g, 10, 30);
    const vector x0 = g.vec(30);
    auto c = config_for(control_strategy::max_residual(), 1e-10, 0);
    for (std::size_t k : {1u, 3u, 7u, 20u}) {
      c.max_iters = k;
      const auto t = run(s, x0, c);
      std::vector<vector> rows;
      for (std::size_t i = 0; i < s.m(); ++i)
        if (t.first_hit[i] != not_hit) rows.emplace_back(s.row(i).begin(), s.row(i).end());
      const auto rest = oracle::orthogonal_residual(rows, subtract(t.final_x, x0));
      EXPECT_LE(static_cast<double>(oracle::norm(rest)), 1e-9) << "k = " << k;
    }
  }
}

TEST(RunProperties, ResidualModesAgree) {
  oracle::gaussian_source g(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = oracle::random_consistent_system(g, 20, 50);
    const vector x0 = g.vec(50);
    for (auto strat : {control_strategy::cyclic(), control_strategy::random(5),
                       control_strategy::max_residual()}) {
      auto c = config_for(strat, 0.0, 1000);
      c.mode = residual_mode::incremental;
      const auto a = run(s, x0, c);
      c.mode = residual_mode::recompute;
      const auto b = run(s, x0, c);
      EXPECT_LE(distance(a.final_x, b.final_x), 1e-8);
    }
  }
}

TEST(RunProperties, FirstHitMatchesTrace) {
  oracle::gaussian_source g(4);
  const auto s = oracle::random_consistent_system(g, 12, 20);
  for (auto strat : {control_strategy::random(9), control_strategy::max_residual()}) {
    const auto t = run(s, g.vec(20), config_for(strat, 1e-10, 300));
    EXPECT_EQ(t.first_hit, first_hit_iterations(t.control, s.m()));
  }
}

TEST(RunProperties, DeterministicWithSeed) {
  oracle::gaussian_source g(6);
  const auto s = oracle::random_consistent_system(g, 10, 25);
  const vector x0 = g.vec(25);
  const auto c = config_for(control_strategy::random(1234), 1e-10, 2000);
  const auto a = run(s, x0, c);
  const auto b = run(s, x0, c);
  EXPECT_EQ(a.control.indices, b.control.indices);
  EXPECT_EQ(a.final_x, b.final_x);
}

TEST(RunProperties, MaxResidualConvergesToPredictedLimit) {
  oracle::gaussian_source g(55);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = oracle::random_consistent_system(g, 10, 20);
    const vector x0 = g.vec(20);
    auto c = config_for(control_strategy::max_residual(), 1e-10, 200000);
    c.limit = predicted_limit(s, x0);
    const auto t = run(s, x0, c);
    ASSERT_TRUE(t.converged);
    EXPECT_LE(*t.dist_to_limit_end, 1e-6 * (1 + norm2(*c.limit)));
    EXPECT_LE(*t.dist_to_limit_end, *t.dist_to_limit_start);
  }
}

TEST(RunProperties, PeriodicResyncKeepsResidualHonest) {
  oracle::gaussian_source g(21);
  const auto s = oracle::random_consistent_system(g, 15, 40);
  auto c = config_for(control_strategy::cyclic(), 0.0, 5000);
  c.mode = residual_mode::incremental;
  c.resync_interval = 100;
  c.record_trace = false;
  const auto t = run(s, g.vec(40), c);
  EXPECT_LE(std::abs(t.final_max_abs_res - norm_inf(s.residual(t.final_x))),
            1e-9 * (1 + norm2(s.b())));
}
