#pragma once

#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nnreach/error_bounds.hpp"
#include "nnreach/grid.hpp"
#include "nnreach/mlp.hpp"

namespace nnreach {

struct ActionBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dims() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd clip(const Eigen::VectorXd& a) const;
  void clip_columns(Eigen::MatrixXd& actions) const;
  Eigen::VectorXd range() const { return upper - lower; }

  /// v in [0, 1], heading in [-pi, pi].
  static ActionBounds land();
  /// v in [0, 1], heading and pitch in [-pi, pi].
  static ActionBounds air();
  /// land() for m = 2, air() for m = 3.
  static ActionBounds defaults_for(int action_dim);
};

/// Deterministic state-feedback controller. Emitted actions are clipped to
/// the action bounds.
class Policy {
 public:
  struct Mlp {
    MlpModel model;
  };
  struct Constant {
    Eigen::VectorXd action;
  };
  /// Per-node actions on a grid, multilinearly interpolated (states outside
  /// the grid are clamped to the box).
  struct Tabulated {
    GridPtr grid;
    std::vector<Eigen::VectorXd> actions;
  };

  Policy() = default;
  static Policy mlp(MlpModel model, ActionBounds bounds);
  static Policy constant(Eigen::VectorXd action, ActionBounds bounds);
  static Policy tabulated(GridPtr grid, std::vector<Eigen::VectorXd> actions, ActionBounds bounds);

  Eigen::VectorXd action(const Eigen::VectorXd& state) const;
  /// Column-per-state batch.
  Eigen::MatrixXd action_batch(const Eigen::MatrixXd& states) const;

  int action_dim() const { return bounds_.dims(); }
  /// 0 when the policy accepts any state dimension (constant policies).
  int state_dim() const;
  const ActionBounds& bounds() const { return bounds_; }
  const std::variant<Mlp, Constant, Tabulated>& impl() const { return impl_; }

 private:
  std::variant<Mlp, Constant, Tabulated> impl_;
  ActionBounds bounds_;
};

enum class PlantKind { learned, true_land, true_air };

/// Unicycle kinematics: (v cos psi, v sin psi).
Eigen::VectorXd true_land_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& action);
/// Point-mass flight: (v cos phi cos psi, v cos phi sin psi, v sin phi).
Eigen::VectorXd true_air_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& action);

/// Plant + policy + additive disturbance set:
///   s_dot = f(s, pi(s)) + d,  d in [lower, upper].
/// A learned plant's rate is its predicted per-step delta divided by the
/// model's dt_env.
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(PlantKind plant, std::optional<MlpModel> model, Policy policy, DisturbanceBounds bounds);

  static ClosedLoopSystem learned(MlpModel model, Policy policy, DisturbanceBounds bounds);
  static ClosedLoopSystem true_land(Policy policy, DisturbanceBounds bounds);
  static ClosedLoopSystem true_air(Policy policy, DisturbanceBounds bounds);

  PlantKind plant() const { return plant_; }
  int state_dim() const { return state_dim_; }
  const Policy& policy() const { return policy_; }
  const DisturbanceBounds& bounds() const { return bounds_; }
  const std::optional<MlpModel>& model() const { return model_; }
  ClosedLoopSystem with_bounds(DisturbanceBounds bounds) const;

  Eigen::VectorXd plant_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const;
  Eigen::VectorXd nominal_rate(const Eigen::VectorXd& state) const;
  /// Column-per-state nominal rates.
  Eigen::MatrixXd nominal_rate_batch(const Eigen::MatrixXd& states) const;
  /// Throws std::invalid_argument when d lies outside the bounds or a
  /// dimension disagrees.
  Eigen::VectorXd rate(const Eigen::VectorXd& state, const Eigen::VectorXd& d) const;

 private:
  PlantKind plant_;
  std::optional<MlpModel> model_;
  Policy policy_;
  DisturbanceBounds bounds_;
  int state_dim_ = 0;
};

/// Learned plant whose rate is `rate` everywhere (constant_output_model with
/// bias rate * dt_env) under a constant zero action. Handy for advection tests.
ClosedLoopSystem constant_rate_system(const Eigen::VectorXd& rate, DisturbanceBounds bounds, double dt_env = 0.1);

/// Policy JSON: MLP policies use the model format with meta.role = "policy"
/// plus meta.action_lower/action_upper; constant and tabulated policies use
/// {"kind": "constant"|"tabulated", ...} as stored in scene files.
nlohmann::json policy_to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);
void save_policy(const Policy& policy, const std::filesystem::path& path);
Policy load_policy(const std::filesystem::path& path);

}  // namespace nnreach
