#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nnreach/dataset.hpp"
#include "nnreach/mlp.hpp"

namespace nnreach {

/// Box-shaped modelling-error set [lower, upper] in rate units (state units
/// per second). Symmetric bounds have lower = -upper.
struct DisturbanceBounds {
  Eigen::VectorXd upper;
  Eigen::VectorXd lower;
  double k_sigma = 3.0;
  double dt_env = 1.0;

  static DisturbanceBounds zero(int n);
  static DisturbanceBounds symmetric(Eigen::VectorXd upper, double k_sigma = 0.0, double dt_env = 1.0);

  int dims() const { return static_cast<int>(upper.size()); }
  bool contains(const Eigen::VectorXd& d, double tol = 1e-12) const;
  /// Throws std::invalid_argument unless upper >= 0 >= lower elementwise.
  void validate() const;
  DisturbanceBounds scaled(double factor) const;
};

/// Per-dimension residual statistics. sd is the population standard deviation.
struct ResidualStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  std::size_t count = 0;
};

/// Residuals model([s;a]) - delta over the validation part of `data`, one
/// vector per tuple, in delta (per-step) units.
std::vector<Eigen::VectorXd> residual_list(const MlpModel& model, const TransitionDataset& data);

ResidualStats residual_stats(const std::vector<Eigen::VectorXd>& residuals);

/// Statistics of residual_list(model, validation). Throws on an empty
/// validation split.
ResidualStats residuals(const MlpModel& model, const TransitionDataset& validation);

/// upper_i = (|mean_i| + k sd_i) / dt_env, lower = -upper.
DisturbanceBounds k_sigma_bounds(const ResidualStats& stats, double k, double dt_env);

/// Fraction of residuals (delta units, divided by bounds.dt_env) lying inside
/// the bounds in every dimension.
double coverage_check(const DisturbanceBounds& bounds, const std::vector<Eigen::VectorXd>& residuals);
/// Same, separately per dimension.
Eigen::VectorXd coverage_per_dimension(const DisturbanceBounds& bounds, const std::vector<Eigen::VectorXd>& residuals);

/// {"upper", "lower", "k_sigma", "dt_env"}
nlohmann::json bounds_to_json(const DisturbanceBounds& b);
DisturbanceBounds bounds_from_json(const nlohmann::json& j);
void save_bounds(const DisturbanceBounds& b, const std::filesystem::path& path);
DisturbanceBounds load_bounds(const std::filesystem::path& path);

}  // namespace nnreach
