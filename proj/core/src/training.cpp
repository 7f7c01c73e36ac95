#include "nnreach/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nnreach/errors.hpp"

namespace nnreach {

namespace {

void activate(Activation a, Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      break;
    case Activation::relu:
      z = z.array().max(0.0).matrix();
      break;
    case Activation::linear:
      break;
  }
}

// Derivative expressed through the activation output a = g(z).
Eigen::MatrixXd derivative_from_output(Activation g, const Eigen::MatrixXd& a) {
  switch (g) {
    case Activation::tanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::sigmoid:
      return (a.array() * (1.0 - a.array())).matrix();
    case Activation::relu:
      return (a.array() > 0.0).cast<double>().matrix();
    case Activation::linear:
      break;
  }
  return Eigen::MatrixXd::Ones(a.rows(), a.cols());
}

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
};

void adam_update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& st, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  st.t += 1;
  st.m = b1 * st.m + (1.0 - b1) * grad;
  st.v = b2 * st.v + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  params.array() -= lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + eps);
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx, std::size_t begin,
                               std::size_t end) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t k = begin; k < end; ++k) out.col(static_cast<Eigen::Index>(k - begin)) = m.col(idx[k]);
  return out;
}

}  // namespace

Eigen::VectorXd LossGradient::flatten() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < d_weights.size(); ++l) n += d_weights[l].size() + d_biases[l].size();
  Eigen::VectorXd g(n);
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    g.segment(k, d_weights[l].size()) = Eigen::Map<const Eigen::VectorXd>(d_weights[l].data(), d_weights[l].size());
    k += d_weights[l].size();
    g.segment(k, d_biases[l].size()) = d_biases[l];
    k += d_biases[l].size();
  }
  return g;
}

LossGradient loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  const int L = model.num_layers();
  const double n = static_cast<double>(inputs.cols());
  std::vector<Eigen::MatrixXd> act(L + 1);
  act[0] = inputs;
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = model.weights(l) * act[l];
    z.colwise() += model.biases(l);
    activate(l + 1 == L ? model.output_activation() : model.hidden_activation(), z);
    act[l + 1] = std::move(z);
  }
  const Eigen::MatrixXd out = model.output_scale().asDiagonal() * act[L];
  const Eigen::MatrixXd err = out - targets;

  LossGradient g;
  g.loss = err.squaredNorm() / n;
  g.d_weights.resize(L);
  g.d_biases.resize(L);

  Eigen::MatrixXd delta = model.output_scale().asDiagonal() * (2.0 / n * err);
  delta = delta.cwiseProduct(derivative_from_output(model.output_activation(), act[L]));
  for (int l = L - 1; l >= 0; --l) {
    g.d_weights[l] = delta * act[l].transpose();
    g.d_biases[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (model.weights(l).transpose() * delta).cwiseProduct(derivative_from_output(model.hidden_activation(), act[l]));
    }
  }
  return g;
}

double mean_squared_error(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  if (inputs.cols() == 0) return 0.0;
  return (model.forward_batch(inputs) - targets).squaredNorm() / static_cast<double>(inputs.cols());
}

FitResult fit_mlp(const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& train_targets,
                  const Eigen::MatrixXd& val_inputs, const Eigen::MatrixXd& val_targets, const TrainingConfig& config,
                  ModelMeta meta, Eigen::VectorXd output_scale) {
  if (train_inputs.cols() == 0) throw std::invalid_argument("fit_mlp: empty training set");
  if (train_inputs.cols() != train_targets.cols()) throw std::invalid_argument("fit_mlp: input/target count mismatch");
  if (config.batch_size <= 0 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("fit_mlp: invalid hyperparameters");
  }
  const Eigen::Index in_dim = train_inputs.rows();
  const Eigen::Index out_dim = train_targets.rows();

  if (output_scale.size() == 0) {
    output_scale = Eigen::VectorXd::Ones(out_dim);
    if (config.output_activation == Activation::tanh || config.output_activation == Activation::sigmoid) {
      for (Eigen::Index i = 0; i < out_dim; ++i) {
        const double m = train_targets.row(i).cwiseAbs().maxCoeff();
        output_scale[i] = m > 0.0 ? config.scale_factor * m : 1.0;
      }
    }
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(in_dim);
  Eigen::VectorXd sd = Eigen::VectorXd::Ones(in_dim);
  if (config.normalize_inputs) {
    mean = train_inputs.rowwise().mean();
    for (Eigen::Index r = 0; r < in_dim; ++r) {
      const double var = (train_inputs.row(r).array() - mean[r]).square().mean();
      sd[r] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
  }
  const Eigen::MatrixXd x = sd.cwiseInverse().asDiagonal() * (train_inputs.colwise() - mean);

  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(in_dim));
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(static_cast<int>(out_dim));

  std::mt19937_64 rng(config.seed);
  MlpModel model = MlpModel::random(sizes, config.hidden_activation, config.output_activation, output_scale, meta, rng);

  Eigen::VectorXd params = model.parameters();
  AdamState adam{Eigen::VectorXd::Zero(params.size()), Eigen::VectorXd::Zero(params.size()), 0};

  FitResult result;
  result.epoch_loss.reserve(config.epochs);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t count = order.size();

  // The returned model is the best checkpoint by full training loss.
  Eigen::VectorXd best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<bool> zero_rows(static_cast<std::size_t>(out_dim));
  for (Eigen::Index i = 0; i < out_dim; ++i) zero_rows[i] = train_targets.row(i).cwiseAbs().maxCoeff() == 0.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    // cosine decay to a tenth of the base rate damps Adam jitter near the loss floor
    const double phase = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 0.0;
    const double lr = config.learning_rate * (0.1 + 0.45 * (1.0 + std::cos(std::numbers::pi * phase)));
    for (std::size_t b = 0; b < count; b += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t e = std::min(count, b + static_cast<std::size_t>(config.batch_size));
      const Eigen::MatrixXd bx = gather_columns(x, order, b, e);
      const Eigen::MatrixXd by = gather_columns(train_targets, order, b, e);
      const LossGradient g = loss_and_gradient(model, bx, by);
      if (!std::isfinite(g.loss)) {
        std::ostringstream os;
        os << "training diverged: non-finite loss at epoch " << epoch << ", batch starting at " << b;
        throw NumericalError(os.str());
      }
      adam_update(params, g.flatten(), adam, lr);
      model.set_parameters(params);
    }
    const double loss = mean_squared_error(model, x, train_targets);
    if (!(loss >= best_loss)) {
      best_loss = loss;
      best = params;
    }
    result.epoch_loss.push_back(best_loss);
  }
  if (config.epochs > 0) model.set_parameters(best);

  // Outputs whose targets are identically zero get an exactly zero output row.
  const Eigen::Index last = static_cast<Eigen::Index>(model.weights(model.num_layers() - 1).rows());
  for (Eigen::Index i = 0; i < last; ++i) {
    if (!zero_rows[i]) continue;
    model.weights(model.num_layers() - 1).row(i).setZero();
    model.biases(model.num_layers() - 1)[i] = 0.0;
  }

  // Fold the input standardisation into the first layer.
  Eigen::MatrixXd& w0 = model.weights(0);
  const Eigen::MatrixXd scaled = w0 * sd.cwiseInverse().asDiagonal();
  model.biases(0) -= scaled * mean;
  w0 = scaled;

  result.train_error = mean_squared_error(model, train_inputs, train_targets);
  if (!std::isfinite(result.train_error)) throw NumericalError("training produced a non-finite model");
  result.validation_error = val_inputs.cols() > 0 ? mean_squared_error(model, val_inputs, val_targets) : 0.0;
  result.baseline_error =
      val_targets.cols() > 0 ? val_targets.squaredNorm() / static_cast<double>(val_targets.cols()) : 0.0;
  result.model = std::move(model);
  return result;
}

FitResult train_dynamics_model(TransitionDataset& data, const TrainingConfig& config, double dt_env) {
  if (data.empty()) throw std::invalid_argument("train_dynamics_model: empty dataset");
  if (!(dt_env > 0.0)) throw std::invalid_argument("train_dynamics_model: dt_env must be positive");
  data.split(config.train_fraction, config.seed);
  const auto tr = data.train_indices();
  const auto va = data.validation_indices();
  if (tr.empty()) throw std::invalid_argument("train_dynamics_model: empty training split");
  ModelMeta meta{data.state_dim(), data.action_dim(), dt_env, "dynamics"};
  return fit_mlp(data.inputs(tr), data.targets(tr), data.inputs(va), data.targets(va), config, meta);
}

}  // namespace nnreach
