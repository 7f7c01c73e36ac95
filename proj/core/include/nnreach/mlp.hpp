#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnreach {

enum class Activation { tanh, sigmoid, relu, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Input/output layout. A dynamics model maps [s; a] (n + m) to a per-step
/// state delta (n); a policy maps s (n) to a (m).
struct ModelMeta {
  int state_dim = 0;
  int action_dim = 0;
  /// Sample period of the environment the deltas were recorded at (s).
  double dt_env = 0.1;
  std::string role = "dynamics";

  int input_dim() const { return role == "policy" ? state_dim : state_dim + action_dim; }
  int output_dim() const { return role == "policy" ? action_dim : state_dim; }
};

/// Feed-forward network y_h = g_h(W_h y_{h-1} + b_h). The final layer is
/// followed by output = output_scale .* g_out(raw); with a tanh output every
/// component is bounded by its scale.
class MlpModel {
 public:
  MlpModel() = default;
  /// All weights and biases start at zero.
  MlpModel(std::vector<int> layer_sizes, Activation hidden, Activation output, Eigen::VectorXd output_scale,
           ModelMeta meta);

  /// Glorot-uniform weights, zero biases.
  static MlpModel random(std::vector<int> layer_sizes, Activation hidden, Activation output,
                         Eigen::VectorXd output_scale, ModelMeta meta, std::mt19937_64& rng);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  const Eigen::VectorXd& output_scale() const { return output_scale_; }
  const ModelMeta& meta() const { return meta_; }
  ModelMeta& meta() { return meta_; }

  const Eigen::MatrixXd& weights(int layer) const { return weights_[layer]; }
  Eigen::MatrixXd& weights(int layer) { return weights_[layer]; }
  const Eigen::VectorXd& biases(int layer) const { return biases_[layer]; }
  Eigen::VectorXd& biases(int layer) { return biases_[layer]; }
  void set_output_scale(Eigen::VectorXd scale);

  /// Throws std::invalid_argument on a length mismatch or non-finite input.
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  /// Column-per-sample batch evaluation; no input validation.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  std::size_t parameter_count() const;
  /// Flattened as W_0 (column-major), b_0, W_1, b_1, ...
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& params);

  /// Checks that weight shapes chain and the output scale is finite and positive.
  void validate() const;

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Activation hidden_ = Activation::tanh;
  Activation output_ = Activation::tanh;
  Eigen::VectorXd output_scale_;
  ModelMeta meta_;
};

/// Builds a model whose output is the constant `delta` regardless of input
/// (zero weights, linear output, bias = delta).
MlpModel constant_output_model(const Eigen::VectorXd& delta, ModelMeta meta);

}  // namespace nnreach
