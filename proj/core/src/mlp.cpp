#include "nnreach/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace nnreach {

namespace {

void apply_activation(Activation a, Eigen::MatrixXd& z) {
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

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::relu:
      return "relu";
    case Activation::linear:
      return "linear";
  }
  return "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

MlpModel::MlpModel(std::vector<int> layer_sizes, Activation hidden, Activation output, Eigen::VectorXd output_scale,
                   ModelMeta meta)
    : layer_sizes_(std::move(layer_sizes)),
      hidden_(hidden),
      output_(output),
      output_scale_(std::move(output_scale)),
      meta_(std::move(meta)) {
  if (layer_sizes_.size() < 2) throw std::invalid_argument("mlp: need at least input and output layer sizes");
  for (int s : layer_sizes_) {
    if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(layer_sizes_[l + 1], layer_sizes_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(layer_sizes_[l + 1]));
  }
  validate();
}

MlpModel MlpModel::random(std::vector<int> layer_sizes, Activation hidden, Activation output,
                          Eigen::VectorXd output_scale, ModelMeta meta, std::mt19937_64& rng) {
  MlpModel m(std::move(layer_sizes), hidden, output, std::move(output_scale), std::move(meta));
  for (int l = 0; l < m.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (m.weights_[l].rows() + m.weights_[l].cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index c = 0; c < m.weights_[l].cols(); ++c) {
      for (Eigen::Index r = 0; r < m.weights_[l].rows(); ++r) m.weights_[l](r, c) = u(rng);
    }
  }
  return m;
}

void MlpModel::set_output_scale(Eigen::VectorXd scale) {
  output_scale_ = std::move(scale);
  validate();
}

Eigen::VectorXd MlpModel::forward(const Eigen::VectorXd& input) const {
  if (input.size() != input_dim()) throw std::invalid_argument("mlp forward: input dimension mismatch");
  if (!input.allFinite()) throw std::invalid_argument("mlp forward: non-finite input");
  return forward_batch(input);
}

Eigen::MatrixXd MlpModel::forward_batch(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd y = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weights_[l] * y;
    z.colwise() += biases_[l];
    apply_activation(l + 1 == num_layers() ? output_ : hidden_, z);
    y = std::move(z);
  }
  return output_scale_.asDiagonal() * y;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::VectorXd MlpModel::parameters() const {
  Eigen::VectorXd p(parameter_count());
  Eigen::Index k = 0;
  for (int l = 0; l < num_layers(); ++l) {
    p.segment(k, weights_[l].size()) = Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
    k += weights_[l].size();
    p.segment(k, biases_[l].size()) = biases_[l];
    k += biases_[l].size();
  }
  return p;
}

void MlpModel::set_parameters(const Eigen::VectorXd& params) {
  if (static_cast<std::size_t>(params.size()) != parameter_count()) {
    throw std::invalid_argument("mlp: parameter vector has wrong length");
  }
  Eigen::Index k = 0;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) = params.segment(k, weights_[l].size());
    k += weights_[l].size();
    biases_[l] = params.segment(k, biases_[l].size());
    k += biases_[l].size();
  }
}

void MlpModel::validate() const {
  if (weights_.size() + 1 != layer_sizes_.size() || biases_.size() != weights_.size()) {
    throw std::invalid_argument("mlp: layer count mismatch");
  }
  for (int l = 0; l < num_layers(); ++l) {
    if (weights_[l].rows() != layer_sizes_[l + 1] || weights_[l].cols() != layer_sizes_[l] ||
        biases_[l].size() != layer_sizes_[l + 1]) {
      throw std::invalid_argument("mlp: weight shapes do not chain with layer_sizes");
    }
  }
  if (output_scale_.size() != output_dim()) throw std::invalid_argument("mlp: output_scale length mismatch");
  for (Eigen::Index i = 0; i < output_scale_.size(); ++i) {
    if (!std::isfinite(output_scale_[i]) || !(output_scale_[i] > 0.0)) {
      throw std::invalid_argument("mlp: output_scale must be finite and positive");
    }
  }
}

MlpModel constant_output_model(const Eigen::VectorXd& delta, ModelMeta meta) {
  const int in = meta.input_dim();
  MlpModel m({in, static_cast<int>(delta.size())}, Activation::linear, Activation::linear,
             Eigen::VectorXd::Ones(delta.size()), std::move(meta));
  m.biases(0) = delta;
  return m;
}

}  // namespace nnreach
