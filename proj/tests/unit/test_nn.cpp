#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "nnreach/dataset.hpp"
#include "nnreach/errors.hpp"
#include "nnreach/mlp.hpp"
#include "nnreach/model_io.hpp"
#include "nnreach/training.hpp"
#include "test_support.hpp"

using namespace nnreach;

namespace {

MlpModel random_model(std::vector<int> sizes, std::uint64_t seed, Activation hidden = Activation::tanh,
                      Activation out = Activation::tanh) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd scale = Eigen::VectorXd::Constant(sizes.back(), 0.7);
  ModelMeta meta{sizes.back(), sizes.front() - sizes.back(), 0.1, "dynamics"};
  auto m = MlpModel::random(sizes, hidden, out, scale, meta, rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int l = 0; l < m.num_layers(); ++l)
    for (Eigen::Index i = 0; i < m.biases(l).size(); ++i) m.biases(l)[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("zero network outputs zero") {
  MlpModel m({4, 8, 2}, Activation::tanh, Activation::tanh, Eigen::VectorXd::Ones(2), {2, 2, 0.1});
  CHECK(m.forward(Eigen::Vector4d(1, -2, 3, 0.5)).norm() == 0.0);
}

TEST_CASE("identity prefix layer") {
  MlpModel m({4, 2}, Activation::linear, Activation::linear, Eigen::VectorXd::Ones(2), {2, 2, 0.1});
  m.weights(0).leftCols(2).setIdentity();
  const Eigen::Vector4d x(0.3, -1.7, 9.0, 4.0);
  CHECK(m.forward(x) == x.head(2));
}

TEST_CASE("forward matches the naive oracle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 2.0);
  for (Activation h : {Activation::tanh, Activation::sigmoid, Activation::relu}) {
    for (int trial = 0; trial < 20; ++trial) {
      auto m = random_model({2, 16, 16, 2}, 100 + trial, h, trial % 2 ? Activation::tanh : Activation::linear);
      Eigen::MatrixXd batch(2, 10);
      for (int k = 0; k < 10; ++k) {
        Eigen::Vector2d x(n(rng), n(rng));
        batch.col(k) = x;
        const Eigen::VectorXd expect = testing::naive_forward(m, x);
        CHECK((m.forward(x) - expect).cwiseAbs().maxCoeff() <= 1e-12);
      }
      const Eigen::MatrixXd out = m.forward_batch(batch);
      for (int k = 0; k < 10; ++k)
        CHECK((out.col(k) - testing::naive_forward(m, batch.col(k))).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("forward input checks") {
  auto m = random_model({4, 8, 2}, 1);
  CHECK_THROWS_AS(m.forward(Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(m.forward(Eigen::Vector4d(1, NAN, 3, 4)), std::invalid_argument);
}

TEST_CASE("tanh output stays within its scale") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_model({4, 16, 3}, 300 + trial);
    for (int k = 0; k < 50; ++k) {
      const Eigen::Vector4d x(n(rng), n(rng), n(rng), n(rng));
      const Eigen::VectorXd y = m.forward(x);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(y[i]) <= m.output_scale()[i]);
    }
  }
}

TEST_CASE("loss gradient matches central differences") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Activation h : {Activation::tanh, Activation::sigmoid}) {
    auto m = random_model({3, 5, 4, 2}, 77, h);
    Eigen::MatrixXd X(3, 7), Y(2, 7);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y.data()[i] = 0.3 * n(rng);
    const Eigen::VectorXd g = loss_and_gradient(m, X, Y).flatten();
    Eigen::VectorXd theta = m.parameters();
    Eigen::VectorXd fd(theta.size());
    const double eps = 1e-6;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      auto mp = m, mm = m;
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += eps;
      tm[i] -= eps;
      mp.set_parameters(tp);
      mm.set_parameters(tm);
      fd[i] = (mean_squared_error(mp, X, Y) - mean_squared_error(mm, X, Y)) / (2 * eps);
    }
    CHECK((g - fd).norm() / std::max(1e-12, fd.norm()) < 1e-4);
  }
}

TEST_CASE("constant zero targets are learned") {
  TransitionDataset data(2, 2);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 200; ++k) data.add({Eigen::Vector2d(u(rng), u(rng)), Eigen::Vector2d(u(rng), u(rng)), Eigen::Vector2d::Zero()});
  TrainingConfig cfg;
  cfg.epochs = 50;
  const auto fit = train_dynamics_model(data, cfg, 0.1);
  CHECK(fit.validation_error < 1e-6);
}

TEST_CASE("linear targets are fitted well") {
  TransitionDataset data(2, 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::Matrix<double, 2, 4> A;
  A << 0.02, -0.01, 0.05, 0.0, 0.0, 0.03, -0.02, 0.04;
  for (int k = 0; k < 1000; ++k) {
    Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
    data.add({x.head(2), x.tail(2), A * x});
  }
  const auto fit = train_dynamics_model(data, TrainingConfig{}, 0.1);
  const Eigen::MatrixXd T = data.targets(data.validation_indices());
  const double var = (T.colwise() - T.rowwise().mean()).squaredNorm() / static_cast<double>(T.cols());
  CHECK(fit.validation_error < 1e-3 * var);
  CHECK(fit.validation_error <= fit.baseline_error);
  const auto& L = fit.epoch_loss;
  for (std::size_t k = 0; k + 10 < L.size(); ++k) CHECK(L[k + 10] <= 1.05 * L[k]);
}

TEST_CASE("training rejects an empty train split") {
  TransitionDataset data(2, 2);
  CHECK_THROWS_AS(train_dynamics_model(data, TrainingConfig{}, 0.1), std::invalid_argument);
}

TEST_CASE("training aborts on a non-finite loss") {
  TransitionDataset data(1, 1);
  for (int k = 0; k < 100; ++k) data.add({Eigen::VectorXd::Constant(1, k), Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)});
  TrainingConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.output_activation = Activation::linear;
  cfg.normalize_inputs = false;
  cfg.epochs = 20;
  CHECK_THROWS_AS(train_dynamics_model(data, cfg, 0.1), NumericalError);
}

TEST_CASE("model save and load") {
  const auto m = random_model({4, 16, 16, 2}, 55);
  const auto path = std::filesystem::temp_directory_path() / "nnreach_model_roundtrip.json";
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(back.parameters() == m.parameters());
  CHECK(back.output_scale() == m.output_scale());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector4d x(n(rng), n(rng), n(rng), n(rng));
    CHECK(back.forward(x) == m.forward(x));
  }

  SUBCASE("truncated file") {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream(path) << text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(load_model(path), FormatError);
  }
  SUBCASE("declared sizes disagree with matrices") {
    auto j = model_to_json(m);
    j["layer_sizes"][1] = 15;
    CHECK_THROWS_AS(model_from_json(j), FormatError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dataset split and csv round trip") {
  TransitionDataset data(2, 2);
  for (int k = 0; k < 50; ++k)
    data.add({Eigen::Vector2d(k, -k), Eigen::Vector2d(0.5, 0.25), Eigen::Vector2d(0.1 * k, 1.0 / (k + 1))});
  data.split(0.8, 3);
  CHECK(data.train_indices().size() == 40);
  CHECK(data.validation_indices().size() == 10);
  const auto path = std::filesystem::temp_directory_path() / "nnreach_dataset.csv";
  save_dataset_csv(data, path);
  const auto back = load_dataset_csv(path, 2, 2);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].state == data[i].state);
    CHECK(back[i].delta == data[i].delta);
    CHECK(back.is_validation(i) == data.is_validation(i));
  }
  std::filesystem::remove(path);
}
