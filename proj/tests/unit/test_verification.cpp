#include <random>

#include "doctest.h"
#include "nnreach/verification.hpp"
#include "test_support.hpp"

using namespace nnreach;

namespace {

ClosedLoopSystem drift(double vx, double vy, double d = 0.0) {
  return constant_rate_system(Eigen::Vector2d(vx, vy), DisturbanceBounds::symmetric(Eigen::Vector2d(d, d)));
}

Scene toy_scene() {
  Scene s;
  s.grid = build_grid({-2, -2}, {6, 4}, {81, 61});
  s.initial_set = ShapeSet({Ball{{0, 0}, 0.7}});
  s.goal_set = ShapeSet({Ball{{5, 3}, 0.4}});
  s.obstacles = ShapeSet({Box{{3, 0.3}, {0.4, 0.4}}, Box{{0, 3}, {0.5, 0.3}}});
  s.validate();
  return s;
}

}  // namespace

TEST_CASE("classification") {
  const Scene s = toy_scene();
  SolverConfig cfg;
  cfg.horizon = 4.0;
  SUBCASE("zero dynamics: safe") {
    const auto a = analyze_frt(drift(0, 0), s, cfg);
    CHECK_FALSE(a.classification.unsafe);
    CHECK(a.classification.per_obstacle == std::vector<bool>{false, false});
  }
  SUBCASE("drift toward the first obstacle only") {
    const auto a = analyze_frt(drift(1, 0), s, cfg);
    CHECK(a.classification.unsafe);
    CHECK(a.classification.per_obstacle == std::vector<bool>{true, false});
    CHECK(a.classification.first_contact_time[0] > 0.0);
  }
  SUBCASE("obstacle inside the initial set") {
    const ShapeSet inner({Box{{0.1, 0.0}, {0.2, 0.2}}});
    const auto a = analyze_frt(drift(0, 0), s, cfg);
    const auto c = classify_policy(a.frt, inner, s.grid);
    CHECK(c.unsafe);
    CHECK(c.first_contact_time[0] == 0.0);
  }
  SUBCASE("grid mismatch") {
    const auto a = analyze_frt(drift(0, 0), s, cfg);
    CHECK_THROWS_AS(classify_policy(a.frt, s.obstacles, build_grid({-2, -2}, {6, 4}, {41, 31})), std::invalid_argument);
  }
}

TEST_CASE("unsafe and safe initial states") {
  const Scene s = toy_scene();
  const Mask init = zero_sublevel_mask(level_set_from_shapes(s.grid, s.initial_set));
  SUBCASE("disjoint BRT") {
    const auto far = level_set_from_shapes(s.grid, ShapeSet({Ball{{4, 2}, 0.5}}));
    CHECK_FALSE(unsafe_initial_states(far, s.initial_set).any());
    CHECK(safe_initial_states(unsafe_initial_states(far, s.initial_set), init) == init);
  }
  SUBCASE("covering BRT") {
    const auto cover = level_set_from_shapes(s.grid, ShapeSet({Ball{{0, 0}, 1.5}}));
    const Mask u = unsafe_initial_states(cover, s.initial_set);
    CHECK(u == init);
    CHECK_FALSE(safe_initial_states(u, init).any());
    const auto r = make_report({cover}, s.initial_set);
    CHECK(r.verdict == Verdict::completely_unsafe);
    CHECK(r.safe_fraction == 0.0);
  }
  SUBCASE("union over obstacles") {
    const auto a = level_set_from_shapes(s.grid, ShapeSet({Ball{{-0.7, 0}, 0.3}}));
    const auto b = level_set_from_shapes(s.grid, ShapeSet({Ball{{0.7, 0}, 0.3}}));
    const Mask u = unsafe_initial_states(std::vector<ScalarField>{a, b}, s.initial_set);
    CHECK(u == mask_or(unsafe_initial_states(a, s.initial_set), unsafe_initial_states(b, s.initial_set)));
    const auto r = make_report({a, b}, s.initial_set);
    CHECK(r.verdict == Verdict::partially_safe);
    CHECK(check_partition(r).empty());
  }
}

TEST_CASE("partition identities on random masks") {
  auto g = build_grid({0, 0}, {1, 1}, {15, 15});
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    Mask init(g, false), unsafe(g, false);
    for (std::size_t k = 0; k < g->num_nodes(); ++k) {
      init.bits[k] = coin(rng);
      unsafe.bits[k] = coin(rng) && init[k];
    }
    const Mask safe = safe_initial_states(unsafe, init);
    CHECK(mask_or(safe, unsafe) == init);
    CHECK_FALSE(mask_and(safe, unsafe).any());
  }
}

TEST_CASE("safe set analysis") {
  const Scene s = toy_scene();
  SolverConfig cfg;
  cfg.horizon = 4.0;
  SUBCASE("obstacle-free scene is completely safe") {
    Scene free = s;
    free.obstacles = ShapeSet();
    const auto a = analyze_safe_set(drift(1, 0), free, cfg);
    CHECK(a.report.safe_fraction == 1.0);
    CHECK(a.report.verdict == Verdict::completely_safe);
  }
  SUBCASE("partially safe drift") {
    const auto a = analyze_safe_set(drift(1, 0, 0.02), s, cfg);
    CHECK(a.brts.size() == 2);
    CHECK(a.report.verdict == Verdict::partially_safe);
    CHECK(check_partition(a.report).empty());
    // FRT safe with respect to obstacle 2 implies its BRT misses the initial set.
    CHECK_FALSE(unsafe_initial_states(a.brts[1].final_field(), s.initial_set).any());
    const auto frt = analyze_frt(drift(1, 0, 0.02), s, cfg);
    CHECK(frt.classification.per_obstacle[0]);
    CHECK_FALSE(frt.classification.per_obstacle[1]);
  }
  SUBCASE("enlarging the disturbance never frees a cell") {
    const auto small = analyze_safe_set(drift(1, 0, 0.02), s, cfg);
    const auto big = analyze_safe_set(drift(1, 0, 0.06), s, cfg);
    CHECK(mask_subset(small.report.unsafe_mask, big.report.unsafe_mask));
    CHECK(big.report.safe_fraction <= small.report.safe_fraction);
  }
}

TEST_CASE("off-grid safety queries") {
  const Scene s = toy_scene();
  SolverConfig cfg;
  cfg.horizon = 4.0;
  const auto a = analyze_safe_set(drift(1, 0, 0.02), s, cfg);
  const auto& r = a.report;
  const Grid& g = *s.grid;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    if (!r.safe_mask[k]) continue;
    const auto x = g.node_coordinates(k);
    CHECK(is_state_safe(r, Eigen::Map<const Eigen::VectorXd>(x.data(), 2)));
  }
  CHECK_THROWS_AS(is_state_safe(r, Eigen::Vector2d(3, 3)), std::invalid_argument);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  int checked = 0;
  while (checked < 100) {
    const Eigen::Vector2d p(u(rng), u(rng));
    if (p.norm() > 0.7) continue;
    ++checked;
    const int i = static_cast<int>(std::lround((p[0] - g.lo()[0]) / g.spacing(0)));
    const int j = static_cast<int>(std::lround((p[1] - g.lo()[1]) / g.spacing(1)));
    const std::size_t k = g.flat_index(std::vector<int>{i, j});
    if (!r.initial_mask[k]) continue;
    // Compare with the nearest node unless the point is within a cell of the zero level.
    if (std::abs(interpolate(r.brt_union, std::vector<double>{p[0], p[1]})) <= g.max_spacing()) continue;
    CHECK(is_state_safe(r, p) == r.safe_mask[k]);
  }
}

TEST_CASE("verdict strings") {
  for (Verdict v : {Verdict::completely_safe, Verdict::completely_unsafe, Verdict::partially_safe})
    CHECK(verdict_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(verdict_from_string("maybe"), std::invalid_argument);
}
