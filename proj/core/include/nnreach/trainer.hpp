#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nnreach/dataset.hpp"
#include "nnreach/dynamics.hpp"
#include "nnreach/error_bounds.hpp"
#include "nnreach/mlp.hpp"
#include "nnreach/scene.hpp"
#include "nnreach/training.hpp"

namespace nnreach {

enum class EnvKind { true_land, true_air };
std::string to_string(EnvKind env);
EnvKind env_from_string(const std::string& s);
int env_state_dim(EnvKind env);
ActionBounds env_action_bounds(EnvKind env);
Eigen::VectorXd env_rate(EnvKind env, const Eigen::VectorXd& s, const Eigen::VectorXd& a);
/// One environment step of length dt (RK4 with the action held).
Eigen::VectorXd env_step(EnvKind env, const Eigen::VectorXd& s, const Eigen::VectorXd& a, double dt);

struct RewardWeights {
  double goal = 1.0;
  double obstacle = 10.0;
  double margin = 0.3;
  double action = 0.01;
};

/// r(s', a) = -goal * |s' - goal_center| - obstacle * max(0, margin - sd(s'))
///            - action * |a|^2, evaluated at the state reached by the step.
struct Reward {
  Eigen::VectorXd goal_center;
  ShapeSet obstacles;
  RewardWeights weights;

  double operator()(const Eigen::VectorXd& next_state, const Eigen::VectorXd& action) const;
};

/// Reward as seen by the planner; `step` is the index within the plan.
using RewardFn = std::function<double(const Eigen::VectorXd& next_state, const Eigen::VectorXd& action, int step)>;
RewardFn as_reward_fn(const Reward& reward);

struct MpcConfig {
  int horizon = 5;
  int candidates = 1000;
  double gamma = 0.9;

  void validate() const;
};

struct MpcDecision {
  Eigen::VectorXd action;
  /// Discounted return of every candidate sequence.
  std::vector<double> returns;
  int best = 0;
  /// candidates x (horizon * m); row k is sequence k, actions back to back.
  Eigen::MatrixXd sequences;
};

/// Random shooting through the learnt model: candidate sequences uniform in
/// the action box, s_{t+1} = s_t + model([s_t; a_t]), return sum gamma^t r_t.
MpcDecision mpc_plan(const MlpModel& model, const RewardFn& reward, const Eigen::VectorXd& state,
                     const MpcConfig& config, const ActionBounds& bounds, std::mt19937_64& rng);
Eigen::VectorXd mpc_action(const MlpModel& model, const RewardFn& reward, const Eigen::VectorXd& state,
                           const MpcConfig& config, const ActionBounds& bounds, std::mt19937_64& rng);

/// N tuples with states uniform in [lo, hi] and actions uniform in the
/// action box, stepped through the true dynamics.
TransitionDataset collect_random_data(EnvKind env, const ActionBounds& bounds, const std::vector<double>& lo,
                                      const std::vector<double>& hi, int n, double dt_env, std::mt19937_64& rng);

/// Closed-loop rollouts of `policy` on the true dynamics from states drawn
/// in `starts`; with probability `explore` an action is replaced by a
/// uniform one. Rollouts restart after `rollout_length` steps or when the
/// state leaves [lo, hi].
TransitionDataset collect_policy_data(EnvKind env, const Policy& policy, const ShapeSet& starts,
                                      const std::vector<double>& lo, const std::vector<double>& hi, int n,
                                      double dt_env, int rollout_length, double explore, std::mt19937_64& rng);

struct DistillResult {
  Policy policy;
  /// Mean over held-out states of mean_i |a_i - label_i| / range_i.
  double heldout_error = 0.0;
  double train_error = 0.0;
  bool degenerate_targets = false;
  std::vector<std::string> warnings;
};

/// Labels every state with mpc_action and fits an MLP policy (20% of the
/// states are held out for the error report). Requires >= 100 states.
DistillResult distill_policy(const MlpModel& model, const RewardFn& reward, const std::vector<Eigen::VectorXd>& states,
                             const MpcConfig& mpc, const ActionBounds& bounds, const TrainingConfig& training,
                             std::uint64_t seed);
/// Same, from precomputed labels.
DistillResult fit_policy(const std::vector<Eigen::VectorXd>& states, const std::vector<Eigen::VectorXd>& labels,
                         const ActionBounds& bounds, const TrainingConfig& training, std::uint64_t seed);

struct TrainRunConfig {
  EnvKind env = EnvKind::true_land;
  int initial_samples = 300;
  int iterations = 2;
  /// On-policy tuples added after each iteration.
  int samples_per_iteration = 350;
  int rollout_length = 60;
  double explore = 0.2;
  int distill_states = 1000;
  double dt_env = 0.1;
  double k_sigma = 3.0;
  MpcConfig mpc;
  RewardWeights reward;
  /// Dynamics models train for 2000 epochs by default.
  TrainingConfig model_training = [] {
    TrainingConfig t;
    t.epochs = 2000;
    return t;
  }();
  TrainingConfig policy_training;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json train_config_to_json(const TrainRunConfig& c);
/// Missing keys keep their defaults.
TrainRunConfig train_config_from_json(const nlohmann::json& j);

struct IterationLog {
  int iteration = 0;
  std::size_t dataset_size = 0;
  double train_error = 0.0;
  double validation_error = 0.0;
  Eigen::VectorXd residual_mean;
  Eigen::VectorXd residual_sd;
  double policy_heldout_error = 0.0;
};

struct TrainArtifacts {
  MlpModel model;
  Policy policy;
  DisturbanceBounds bounds;
  TransitionDataset dataset;
  ResidualStats residual_stats;
  double coverage = 0.0;
  /// One entry per fitted model; the last is the final model.
  std::vector<IterationLog> iterations;
  nlohmann::json log;
};

/// Fits, distills and collects for `iterations` rounds, then fits the final
/// model and policy on the whole dataset and derives k-sigma bounds.
TrainArtifacts train_loop(const TrainRunConfig& config, const Scene& scene);

}  // namespace nnreach
