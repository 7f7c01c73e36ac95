#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "nnreach/errors.hpp"
#include "nnreach/hj_solver.hpp"
#include "nnreach/oracle.hpp"
#include "nnreach/scene.hpp"
#include "nnreach/tube_io.hpp"
#include "test_support.hpp"

using namespace nnreach;

namespace {

DisturbanceBounds sym(std::vector<double> d) {
  return DisturbanceBounds::symmetric(Eigen::Map<Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size())));
}

ClosedLoopSystem constant_sys(std::vector<double> c, std::vector<double> d) {
  return constant_rate_system(Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())), sym(d));
}

// A swirling field with a sink near (1, 1) on the 2-D test domain.
ClosedLoopSystem swirl_sys(const GridPtr& g, double d) {
  std::vector<Eigen::VectorXd> actions;
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    const auto x = g->node_coordinates(k);
    const double heading = std::atan2(-(x[0] - 1.0), x[1] - 1.0) + 0.5;
    actions.push_back(Eigen::Vector2d(0.8, std::remainder(heading, 2 * M_PI)));
  }
  return ClosedLoopSystem::true_land(Policy::tabulated(g, actions, ActionBounds::land()), sym({d, d}));
}

void check_nested(const TubeResult& tube) {
  for (std::size_t k = 0; k + 1 < tube.snapshots.size(); ++k) {
    CHECK(mask_subset(zero_sublevel_mask(tube.snapshots[k].field), zero_sublevel_mask(tube.snapshots[k + 1].field)));
    if (tube.config.direction == Direction::backward)
      CHECK(tube.snapshots[k + 1].time < tube.snapshots[k].time);
    else
      CHECK(tube.snapshots[k + 1].time > tube.snapshots[k].time);
  }
}

}  // namespace

TEST_CASE("upwind gradients") {
  auto g = build_grid({0}, {1}, {11});
  ScalarField lin(g), sq(g), cst(g, 3.0);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    const double x = g->node_coordinates(k)[0];
    lin[k] = x;
    sq[k] = x * x;
  }
  const auto gl = upwind_gradients(lin);
  const auto gc = upwind_gradients(cst);
  const auto gs = upwind_gradients(sq);
  const double h = g->spacing(0);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    CHECK(std::abs(gl.minus[0][k] - 1.0) <= 1e-12);
    CHECK(std::abs(gl.plus[0][k] - 1.0) <= 1e-12);
    CHECK(gc.minus[0][k] == 0.0);
    CHECK(gc.plus[0][k] == 0.0);
    if (k > 0 && k + 1 < g->num_nodes()) CHECK(gs.plus[0][k] - gs.minus[0][k] == doctest::Approx(2 * h).epsilon(1e-9));
  }
  // Boundary nodes see the extrapolated ghost value.
  CHECK(gs.minus[0][0] == gs.plus[0][0]);
}

TEST_CASE("upwind gradients are exact on multilinear-free linear fields in 3-D") {
  auto g = build_grid({-1, 0, 2}, {1, 2, 3}, {7, 9, 5});
  ScalarField f(g);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    const auto x = g->node_coordinates(k);
    f[k] = 0.5 * x[0] - 2.0 * x[1] + 3.0 * x[2];
  }
  const auto gr = upwind_gradients(f);
  const double slope[3] = {0.5, -2.0, 3.0};
  for (int d = 0; d < 3; ++d)
    for (std::size_t k = 0; k < g->num_nodes(); ++k) {
      CHECK(std::abs(gr.minus[d][k] - slope[d]) <= 1e-12);
      CHECK(std::abs(gr.plus[d][k] - slope[d]) <= 1e-12);
    }
}

TEST_CASE("optimal disturbance") {
  const auto b = sym({0.3, 0.5});
  CHECK(optimal_disturbance(Eigen::Vector2d(1, -2), b, TargetMode::reach_goal) == Eigen::Vector2d(0.3, -0.5));
  CHECK(optimal_disturbance(Eigen::Vector2d(1, -2), b, TargetMode::reach_unsafe) == Eigen::Vector2d(-0.3, 0.5));
  CHECK(optimal_disturbance(Eigen::Vector2d::Zero(), b, TargetMode::reach_goal) == Eigen::Vector2d::Zero());
}

TEST_CASE("optimal disturbance and hamiltonian match corner enumeration") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dims = 1 + trial % 4;
    Eigen::VectorXd p(dims), f(dims), up(dims), lo(dims);
    for (int i = 0; i < dims; ++i) {
      p[i] = trial % 7 == 0 && i == 0 ? 0.0 : n(rng);
      f[i] = n(rng);
      up[i] = u(rng);
      lo[i] = trial % 2 ? -up[i] : -u(rng);
    }
    DisturbanceBounds b{up, lo, 0.0, 1.0};
    for (TargetMode mode : {TargetMode::reach_goal, TargetMode::reach_unsafe}) {
      const auto [value, corner] = corner_extremum(p, b, mode);
      CHECK(std::abs(p.dot(optimal_disturbance(p, b, mode)) - value) <= 1e-12);
      CHECK(std::abs(hamiltonian(p, f, b, mode) - (p.dot(f) + value)) <= 1e-12);
    }
  }
}

TEST_CASE("analytic hamiltonian examples") {
  const auto sys = constant_sys({2, 5}, {0.3, 0.4});
  const Eigen::Vector2d s(0, 0);
  CHECK(analytic_hamiltonian(s, Eigen::Vector2d(1, 0), sys, TargetMode::reach_goal) == doctest::Approx(2.3));
  CHECK(analytic_hamiltonian(s, Eigen::Vector2d(1, 0), sys, TargetMode::reach_unsafe) == doctest::Approx(1.7));
  const auto plain = constant_sys({2, 5}, {0, 0});
  const Eigen::Vector2d p(-0.7, 0.2);
  CHECK(analytic_hamiltonian(s, p, plain, TargetMode::reach_goal) == doctest::Approx(p.dot(Eigen::Vector2d(2, 5))));
  // H equals p.rate(s, d*) for the optimal disturbance.
  const Eigen::VectorXd d = optimal_disturbance(p, sys.bounds(), TargetMode::reach_unsafe);
  CHECK(analytic_hamiltonian(s, p, sys, TargetMode::reach_unsafe) == doctest::Approx(p.dot(sys.rate(s, d))));
}

TEST_CASE("dissipation coefficients") {
  auto g = build_grid({0, 0}, {1, 1}, {5, 5});
  const auto a = dissipation_coefficients(constant_sys({1, -2}, {0.1, 0.1}), *g);
  CHECK(a[0] == doctest::Approx(1.1));
  CHECK(a[1] == doctest::Approx(2.1));
  CHECK(dissipation_coefficients(constant_sys({0, 0}, {0, 0}), *g).norm() == 0.0);
  auto g2 = build_grid({-1.5, -1.5}, {3.5, 3.5}, {31, 31});
  const auto sys = swirl_sys(g2, 0.05);
  const auto alpha = dissipation_coefficients(sys, *g2);
  for (std::size_t k = 0; k < g2->num_nodes(); ++k) {
    const auto x = g2->node_coordinates(k);
    const Eigen::VectorXd f = sys.nominal_rate(Eigen::Map<const Eigen::VectorXd>(x.data(), 2));
    for (int i = 0; i < 2; ++i) CHECK(alpha[i] >= std::abs(f[i]) + 0.05);
  }
}

TEST_CASE("lax friedrichs examples") {
  const auto sys = constant_sys({1, -0.5}, {0.2, 0.1});
  const Eigen::Vector2d s(0, 0), p(0.4, -1.3), alpha(1.2, 0.6);
  for (TargetMode m : {TargetMode::reach_goal, TargetMode::reach_unsafe})
    CHECK(lax_friedrichs_H(s, p, p, sys, m, alpha) == analytic_hamiltonian(s, p, sys, m));
  const auto zero = constant_sys({0, 0}, {0, 0});
  CHECK(lax_friedrichs_H(s, Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 0), zero, TargetMode::reach_goal,
                         Eigen::Vector2d(1, 1)) == doctest::Approx(-1.0));
}

TEST_CASE("lax friedrichs error is first order") {
  const auto sys = constant_sys({1.0, 0.5}, {0.1, 0.2});
  auto error_at = [&](int nodes) {
    auto g = build_grid({0, 0}, {2, 2}, {nodes, nodes});
    ScalarField v(g);
    for (std::size_t k = 0; k < g->num_nodes(); ++k) {
      const auto x = g->node_coordinates(k);
      v[k] = std::sin(x[0]) * std::cos(x[1]);
    }
    const auto gr = upwind_gradients(v);
    const auto alpha = dissipation_coefficients(sys, *g);
    double worst = 0.0;
    std::vector<int> idx(2);
    for (std::size_t k = 0; k < g->num_nodes(); ++k) {
      g->multi_index(k, idx);
      if (idx[0] == 0 || idx[1] == 0 || idx[0] == nodes - 1 || idx[1] == nodes - 1) continue;
      const auto x = g->node_coordinates(k);
      const Eigen::Vector2d pm(gr.minus[0][k], gr.minus[1][k]), pp(gr.plus[0][k], gr.plus[1][k]);
      const Eigen::Vector2d exact(std::cos(x[0]) * std::cos(x[1]), -std::sin(x[0]) * std::sin(x[1]));
      const Eigen::Vector2d s(x[0], x[1]);
      const double e = std::abs(lax_friedrichs_H(s, pm, pp, sys, TargetMode::reach_goal, alpha) -
                                analytic_hamiltonian(s, exact, sys, TargetMode::reach_goal));
      worst = std::max(worst, e);
    }
    return worst;
  };
  const double ratio = error_at(41) / error_at(81);
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.5);
}

TEST_CASE("scheme consistency with the freezing term") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto zero_d = sym({0, 0, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d p(n(rng), n(rng), n(rng)), f(n(rng), n(rng), n(rng)), alpha(2, 3, 4);
    SolverConfig cfg;
    cfg.direction = Direction::backward;
    // tau = -t, so dV/dt = -(dV/dtau).
    const double dvdt = -scheme_rate(p, p, f, zero_d, cfg, alpha);
    CHECK(dvdt == -std::min(0.0, p.dot(f)));
  }
}

TEST_CASE("cfl dt") {
  auto g = build_grid({0, 0}, {1, 1}, {11, 11});
  SolverConfig cfg;
  cfg.cfl_factor = 0.5;
  CHECK(cfl_dt(cfg, Eigen::Vector2d(1, 1), *g) == doctest::Approx(0.025));
  auto g2 = build_grid({0, 0}, {1, 1}, {21, 21});
  CHECK(cfl_dt(cfg, Eigen::Vector2d(1, 1), *g2) == doctest::Approx(0.0125));
  CHECK(cfl_dt(cfg, Eigen::Vector2d(0, 0), *g) == doctest::Approx(cfg.horizon / 100));
}

TEST_CASE("step") {
  auto g = build_grid({-2, -2}, {2, 2}, {41, 41});
  const ShapeSet target({Ball{{0, 0}, 0.5}});
  const auto v0 = level_set_from_shapes(g, target);
  SolverConfig cfg;
  SUBCASE("dt = 0 is the identity") {
    const auto v1 = step(v0, constant_sys({1, 0}, {0.1, 0.1}), cfg, 0.0);
    for (std::size_t k = 0; k < v0.size(); ++k) CHECK(v1[k] == v0[k]);
  }
  SUBCASE("flow pointing away leaves the field unchanged") {
    // For the BRT, an outward radial flow never carries states into the target.
    std::vector<Eigen::VectorXd> actions;
    for (std::size_t k = 0; k < g->num_nodes(); ++k) {
      const auto x = g->node_coordinates(k);
      actions.push_back(Eigen::Vector2d(0.8, std::atan2(x[1], x[0])));
    }
    const auto sys = ClosedLoopSystem::true_land(Policy::tabulated(g, actions, ActionBounds::land()), sym({0, 0}));
    const auto v1 = step(v0, sys, cfg, 0.01);
    for (std::size_t k = 0; k < v0.size(); ++k) CHECK(v1[k] == v0[k]);
  }
  SUBCASE("values never increase") {
    const auto sys = swirl_sys(g, 0.05);
    const double dt = cfl_dt(cfg, dissipation_coefficients(sys, *g), *g);
    auto v = v0;
    for (int i = 0; i < 20; ++i) {
      const auto next = step(v, sys, cfg, dt);
      for (std::size_t k = 0; k < v.size(); ++k) CHECK(next[k] <= v[k]);
      v = next;
    }
  }
  SUBCASE("CFL violation") {
    const auto sys = constant_sys({1, 0}, {0, 0});
    const double dt = cfl_dt(cfg, dissipation_coefficients(sys, *g), *g);
    CHECK_THROWS_AS(step(v0, sys, cfg, 2.5 * dt), NumericalError);
  }
}

TEST_CASE("one dimensional advection moves the front") {
  auto g = build_grid({-6}, {2}, {161});
  const double h = g->spacing(0);
  const ShapeSet target({Ball{{0.0}, 0.5}});
  const auto sys = constant_sys({1.0}, {0.0});
  SolverConfig cfg;
  cfg.convergence_eps = 0.0;
  const double dt = cfl_dt(cfg, dissipation_coefficients(sys, *g), *g);
  auto v = level_set_from_shapes(g, target);
  auto left_front = [&](const ScalarField& f) {
    for (std::size_t k = 0; k + 1 < f.size(); ++k)
      if (f[k] > 0.0 && f[k + 1] <= 0.0) return g->coordinate(0, static_cast<int>(k)) + h * f[k] / (f[k] - f[k + 1]);
    return std::numeric_limits<double>::quiet_NaN();
  };
  for (int k = 1; k <= 60; ++k) {
    v = step(v, sys, cfg, dt);
    if (k % 20 == 0) CHECK(std::abs(left_front(v) - (-0.5 - k * dt * 1.0)) <= 2 * h);
  }
}

TEST_CASE("zero dynamics keep the target") {
  auto g = build_grid({-2, -2}, {2, 2}, {31, 31});
  const ShapeSet target({Box{{0.3, -0.2}, {0.6, 0.4}}});
  const auto sys = constant_sys({0, 0}, {0, 0});
  SolverConfig cfg;
  cfg.horizon = 2.0;
  const Mask m0 = zero_sublevel_mask(level_set_from_shapes(g, target));
  CHECK(solve_brt(target, sys, cfg, g).final_mask() == m0);
  const auto frt = solve_frt(target, sys, cfg, g);
  for (const auto& s : frt.snapshots) CHECK(zero_sublevel_mask(s.field) == m0);
}

TEST_CASE("constant advection matches the swept capsule") {
  auto g = build_grid({-1, -2}, {5, 2}, {81, 55});
  const double h = g->max_spacing();
  const ShapeSet ball({Ball{{1, 0}, 0.7}});
  const auto sys = constant_sys({1, 0}, {0, 0});
  SolverConfig cfg;
  cfg.horizon = 3.0;
  const auto brt = solve_brt(ball, sys, cfg, g);
  CHECK(testing::mask_hausdorff(brt.final_mask(), testing::capsule_mask(g, {-2, 0}, {1, 0}, 0.7)) <= 2 * h);
  const auto frt = solve_frt(ball, sys, cfg, g);
  CHECK(testing::mask_hausdorff(frt.final_mask(), testing::capsule_mask(g, {1, 0}, {4, 0}, 0.7)) <= 2 * h);
  CHECK(brt.snapshots.front().time == 0.0);
  CHECK(brt.snapshots.back().time == doctest::Approx(-3.0));
  CHECK(frt.snapshots.back().time == doctest::Approx(3.0));
  check_nested(brt);
  check_nested(frt);
}

TEST_CASE("tubes are nested and grow with the disturbance") {
  auto g = build_grid({-1.5, -1.5}, {3.5, 3.5}, {51, 51});
  const ShapeSet target({Box{{2.2, 1.0}, {0.3, 0.5}}});
  SolverConfig cfg;
  cfg.horizon = 3.0;
  cfg.snapshot_stride = 5;
  for (Direction dir : {Direction::backward, Direction::forward}) {
    cfg.direction = dir;
    const auto v0 = level_set_from_shapes(g, target);
    const auto small = solve_tube(v0, swirl_sys(g, 0.05), cfg);
    const auto big = solve_tube(v0, swirl_sys(g, 0.10), cfg);
    check_nested(small);
    check_nested(big);
    CHECK(mask_subset(small.final_mask(), big.final_mask()));
    CHECK(small.diagnostics.steps > 0);
    CHECK(small.diagnostics.max_abs_hamiltonian > 0.0);
  }
}

TEST_CASE("backward tube of f equals forward tube of -f") {
  auto g = build_grid({-4}, {4}, {161});
  const ShapeSet target({Ball{{0.5}, 0.4}});
  SolverConfig cfg;
  cfg.horizon = 2.0;
  for (TargetMode mode : {TargetMode::reach_goal, TargetMode::reach_unsafe}) {
    cfg.target_mode = mode;
    const auto brt = solve_brt(target, constant_sys({-0.7}, {0.2}), cfg, g);
    const auto frt = solve_frt(target, constant_sys({0.7}, {0.2}), cfg, g);
    CHECK(brt.final_mask() == frt.final_mask());
    for (std::size_t k = 0; k < g->num_nodes(); ++k) CHECK(brt.final_field()[k] == frt.final_field()[k]);
  }
  // Reach-goal shrinks the set relative to reach-unsafe.
  cfg.target_mode = TargetMode::reach_goal;
  const auto goal = solve_brt(target, constant_sys({-0.7}, {0.2}), cfg, g);
  cfg.target_mode = TargetMode::reach_unsafe;
  const auto unsafe = solve_brt(target, constant_sys({-0.7}, {0.2}), cfg, g);
  CHECK(mask_subset(goal.final_mask(), unsafe.final_mask()));
  CHECK(goal.final_mask().count() < unsafe.final_mask().count());
}

TEST_CASE("early stopping keeps the final time") {
  auto g = build_grid({-2, -2}, {2, 2}, {21, 21});
  SolverConfig cfg;
  cfg.horizon = 5.0;
  const auto tube = solve_brt(ShapeSet({Ball{{0, 0}, 0.5}}), constant_sys({0, 0}, {0, 0}), cfg, g);
  CHECK(tube.diagnostics.stopped_early);
  CHECK(tube.snapshots.back().time == doctest::Approx(-5.0));
}

TEST_CASE("long land run stays stable") {
  const Scene scene = land_scene(101);
  const auto sys = swirl_sys(scene.grid, 0.05);
  SolverConfig cfg;
  cfg.convergence_eps = 0.0;
  cfg.snapshot_stride = 100000;
  const auto alpha = dissipation_coefficients(sys, *scene.grid);
  cfg.horizon = 10000 * cfl_dt(cfg, alpha, *scene.grid);
  const auto v0 = level_set_from_shapes(scene.grid, scene.obstacles);
  const auto tube = solve_tube(v0, sys, cfg);
  CHECK(tube.diagnostics.steps >= 10000);
  CHECK(tube.final_field().all_finite());
  CHECK(tube.final_field().max_abs() <= v0.max_abs() + scene.grid->diameter());
}

TEST_CASE("config validation and tube io") {
  SolverConfig bad;
  bad.cfl_factor = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SolverConfig{};
  bad.horizon = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  auto g = build_grid({-2, -2}, {2, 2}, {21, 21});
  SolverConfig cfg;
  cfg.horizon = 1.0;
  cfg.snapshot_stride = 3;
  const auto tube = solve_frt(ShapeSet({Ball{{0, 0}, 0.5}}), constant_sys({0.5, 0.2}, {0.05, 0.05}), cfg, g);
  const auto dir = std::filesystem::temp_directory_path() / "nnreach_tube_io";
  const auto manifest = write_tube(tube, dir, "frt");
  const auto back = read_tube(manifest);
  REQUIRE(back.snapshots.size() == tube.snapshots.size());
  for (std::size_t i = 0; i < tube.snapshots.size(); ++i) {
    CHECK(back.snapshots[i].time == tube.snapshots[i].time);
    for (std::size_t k = 0; k < g->num_nodes(); ++k) CHECK(back.snapshots[i].field[k] == tube.snapshots[i].field[k]);
  }
  CHECK(back.config.direction == Direction::forward);
  CHECK(back.diagnostics.steps == tube.diagnostics.steps);
  std::filesystem::remove_all(dir);
}
