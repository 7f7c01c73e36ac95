#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nnreach/dynamics.hpp"
#include "nnreach/error_bounds.hpp"
#include "nnreach/grid.hpp"
#include "nnreach/hj_solver.hpp"
#include "nnreach/shapes.hpp"
#include "nnreach/verification.hpp"

namespace nnreach {

enum class DisturbanceStrategy { zero, uniform_random, worst_case };
std::string to_string(DisturbanceStrategy s);
DisturbanceStrategy disturbance_strategy_from_string(const std::string& s);

/// Aligned per-sample lists; actions[k] and disturbances[k] are the inputs
/// applied from states[k].
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> actions;
  std::vector<Eigen::VectorXd> disturbances;
  bool reached_goal = false;
  bool hit_obstacle = false;
  bool horizon_exhausted = false;
  bool left_domain = false;
};

struct RolloutOptions {
  DisturbanceStrategy strategy = DisturbanceStrategy::zero;
  std::optional<ShapeSet> obstacles;
  std::optional<ShapeSet> goal;
  /// Leaving this box stops the rollout with left_domain set.
  GridPtr domain;
  /// Value field whose gradient drives the worst_case strategy (a BRT of
  /// the obstacles); without it worst_case falls back to zero.
  std::optional<ScalarField> value;
  std::uint64_t seed = 0;
};

/// Fixed-step RK4 with the disturbance held over each step.
Trajectory rollout(const ClosedLoopSystem& sys, const Eigen::VectorXd& s0, double horizon, double dt,
                   const RolloutOptions& options = {});

/// Stream for (seed, a, b, c); independent for distinct tuples.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Rejection sample uniformly from a shape set's interior.
Eigen::VectorXd sample_in_shape(const ShapeSet& shape, std::mt19937_64& rng);

struct MonteCarloConfig {
  int num_samples = 1000;
  /// Uniform-random draws per sample in addition to the zero draw.
  int num_disturbance_draws = 16;
  bool include_zero_draw = true;
  double horizon = 10.0;
  double dt = 0.1;
  std::uint64_t seed = 1;
  GridPtr domain;
};

struct MonteCarloResult {
  std::vector<Eigen::VectorXd> samples;
  std::vector<bool> safe;
  double safe_fraction() const;
};

/// A sample is safe iff none of its rollouts touches an obstacle within the
/// horizon. Draw d of sample i always uses the same random stream, so adding
/// draws can only turn safe samples unsafe.
MonteCarloResult mc_ground_truth(const ClosedLoopSystem& sys, const ShapeSet& initial, const ShapeSet& obstacles,
                                 const MonteCarloConfig& config);

void write_mc_csv(const MonteCarloResult& mc, const std::filesystem::path& path);

/// Exhaustive extremum of p.d over the 2^n box corners and d = 0; ties keep
/// the earlier candidate (zero first).
std::pair<double, Eigen::VectorXd> corner_extremum(const Eigen::VectorXd& p, const DisturbanceBounds& bounds,
                                                    TargetMode mode);

/// Greedy reachability: from every node, each step applies the corner
/// disturbance that most decreases the target signed distance after the
/// step. Marks nodes whose trajectory enters the target within the horizon.
Mask exhaustive_brt_small(const ClosedLoopSystem& sys, const ShapeSet& target, const GridPtr& grid, double horizon,
                          double dt);

/// Sample-wise comparison of a level-set safe set with Monte-Carlo labels.
/// Conservative: BRT-unsafe but MC-safe. Optimistic: BRT-safe but MC-unsafe.
struct McAgreement {
  int samples = 0;
  int agree = 0;
  int conservative = 0;
  int optimistic = 0;
  /// Disagreements whose sample lies within one grid cell of the BRT zero
  /// level set (the union field changes sign on the surrounding nodes).
  int near_boundary = 0;
  /// Optimistic disagreements that are not near the boundary.
  int unexplained = 0;
  double agreement() const { return samples > 0 ? static_cast<double>(agree) / samples : 0.0; }
};

/// True when the field changes sign on the grid nodes within one spacing of
/// `point` in every dimension.
bool near_zero_level(const ScalarField& field, std::span<const double> point);

McAgreement compare_with_mc(const VerificationReport& report, const MonteCarloResult& mc);
nlohmann::json agreement_to_json(const McAgreement& a);

}  // namespace nnreach
