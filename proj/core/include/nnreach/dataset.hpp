#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace nnreach {

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  Eigen::VectorXd delta;
};

/// Observed (s_t, a_t, s_{t+1} - s_t) tuples with a train/validation marker.
class TransitionDataset {
 public:
  TransitionDataset() = default;
  TransitionDataset(int state_dim, int action_dim);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  const Transition& operator[](std::size_t i) const { return tuples_[i]; }
  const std::vector<Transition>& tuples() const { return tuples_; }

  /// New tuples are marked as training data until the next split().
  void add(Transition t);
  void append(const TransitionDataset& other);

  /// Uniform random split: round(train_fraction * size) tuples go to training.
  void split(double train_fraction, std::uint64_t seed);
  bool is_validation(std::size_t i) const { return validation_[i] != 0; }
  void set_validation(std::size_t i, bool v) { validation_[i] = v ? 1 : 0; }
  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> validation_indices() const;

  /// Columns are [s; a] for the given tuples.
  Eigen::MatrixXd inputs(const std::vector<std::size_t>& idx) const;
  /// Columns are the recorded deltas.
  Eigen::MatrixXd targets(const std::vector<std::size_t>& idx) const;

 private:
  int state_dim_ = 0;
  int action_dim_ = 0;
  std::vector<Transition> tuples_;
  std::vector<std::uint8_t> validation_;
};

/// CSV columns s0.., a0.., ds0.., split ("train" | "validation").
void save_dataset_csv(const TransitionDataset& data, const std::filesystem::path& path);
TransitionDataset load_dataset_csv(const std::filesystem::path& path, int state_dim, int action_dim);

}  // namespace nnreach
