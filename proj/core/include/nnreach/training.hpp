#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nnreach/dataset.hpp"
#include "nnreach/mlp.hpp"

namespace nnreach {

/// Supervised training hyperparameters. Defaults: two hidden layers of 32
/// tanh units, tanh output scaled to 1.5 x max |target|, Adam at 1e-3 (cosine
/// decay to 1e-4) with
/// batch 64 for 500 epochs, 80/20 split.
struct TrainingConfig {
  std::vector<int> hidden = {32, 32};
  Activation hidden_activation = Activation::tanh;
  Activation output_activation = Activation::tanh;
  double scale_factor = 1.5;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 500;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  /// Standardise inputs during training; the affine map is folded into the
  /// first layer afterwards so the saved model takes raw inputs.
  bool normalize_inputs = true;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;

  /// Same flattening order as MlpModel::parameters().
  Eigen::VectorXd flatten() const;
};

/// Mean squared error E = (1/N) sum_k ||model(x_k) - y_k||^2 and its exact
/// gradient by backpropagation. Columns of inputs/targets are samples.
LossGradient loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

double mean_squared_error(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

struct FitResult {
  MlpModel model;
  /// Full training-set loss of the retained checkpoint after each epoch.
  std::vector<double> epoch_loss;
  double train_error = 0.0;
  double validation_error = 0.0;
  /// Validation error of the zero predictor: mean ||y||^2.
  double baseline_error = 0.0;
};

/// Fits an MLP with Adam. `output_scale` fixes the tanh output range; pass an
/// empty vector to derive it as scale_factor * max |target| per output.
/// Throws NumericalError when the loss becomes non-finite and
/// std::invalid_argument on empty training data.
FitResult fit_mlp(const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& train_targets,
                  const Eigen::MatrixXd& val_inputs, const Eigen::MatrixXd& val_targets, const TrainingConfig& config,
                  ModelMeta meta, Eigen::VectorXd output_scale = {});

/// Splits `data` (train_fraction, seed) in place and fits a dynamics model on
/// the training part; validation metrics use the validation part.
FitResult train_dynamics_model(TransitionDataset& data, const TrainingConfig& config, double dt_env);

}  // namespace nnreach
