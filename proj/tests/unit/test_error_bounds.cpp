#include <random>

#include "doctest.h"
#include "nnreach/error_bounds.hpp"
#include "nnreach/mlp.hpp"

using namespace nnreach;

namespace {

std::vector<Eigen::VectorXd> column_list(const Eigen::MatrixXd& M) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index c = 0; c < M.cols(); ++c) out.emplace_back(M.col(c));
  return out;
}

}  // namespace

TEST_CASE("perfect model has zero residuals") {
  const Eigen::Vector2d delta(0.01, -0.02);
  const auto model = constant_output_model(delta, {2, 2, 0.1});
  TransitionDataset data(2, 2);
  for (int k = 0; k < 20; ++k) data.add({Eigen::Vector2d(k, 1), Eigen::Vector2d(0, 0), delta});
  data.split(0.5, 1);
  const auto stats = residuals(model, data);
  CHECK(stats.sd.norm() == 0.0);
  CHECK(stats.mean.norm() == 0.0);
  CHECK(stats.count == 10);
}

TEST_CASE("residual statistics use the population sd") {
  const auto stats = residual_stats({Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)});
  CHECK(stats.mean[0] == 0.0);
  CHECK(stats.sd[0] == doctest::Approx(1.0));
  CHECK(stats.min[0] == -1.0);
  CHECK(stats.max[0] == 1.0);
  CHECK_THROWS_AS(residual_stats({}), std::invalid_argument);
}

TEST_CASE("k sigma bounds") {
  ResidualStats s;
  s.mean = Eigen::Vector2d::Zero();
  s.sd = Eigen::Vector2d(0.001, 0.002);
  s.count = 10;
  const auto b = k_sigma_bounds(s, 3.0, 0.1);
  CHECK(b.upper[0] == doctest::Approx(0.03));
  CHECK(b.upper[1] == doctest::Approx(0.06));
  CHECK(b.lower == -b.upper);

  s.sd.setZero();
  s.mean = Eigen::Vector2d(-0.002, 0.004);
  const auto z = k_sigma_bounds(s, 3.0, 0.1);
  CHECK(z.upper[0] == doctest::Approx(0.02));
  CHECK(z.upper[1] == doctest::Approx(0.04));
  CHECK_THROWS_AS(k_sigma_bounds(s, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(k_sigma_bounds(s, 3.0, 0.0), std::invalid_argument);
}

TEST_CASE("three sigma covers gaussian residuals") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n0(0.0, 0.001), n1(0.0005, 0.002);
  Eigen::MatrixXd R(2, 100000);
  for (Eigen::Index k = 0; k < R.cols(); ++k) R.col(k) = Eigen::Vector2d(n0(rng), n1(rng));
  const auto list = column_list(R);
  const auto b = k_sigma_bounds(residual_stats(list), 3.0, 0.1);
  CHECK(coverage_check(b, list) >= 0.99);
}

TEST_CASE("coverage extremes and monotonicity") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd R(3, 500);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = n(rng);
  const auto list = column_list(R);
  const double dt = 0.1;
  const auto full = DisturbanceBounds::symmetric(R.cwiseAbs().rowwise().maxCoeff() / dt, 0.0, dt);
  CHECK(coverage_check(full, list) == 1.0);
  CHECK(coverage_check(DisturbanceBounds::symmetric(Eigen::Vector3d::Zero(), 0.0, dt), list) == 0.0);

  const auto stats = residual_stats(list);
  double prev_cov = 0.0;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(3);
  for (double k : {0.5, 1.0, 2.0, 3.0, 4.0}) {
    const auto b = k_sigma_bounds(stats, k, dt);
    CHECK((b.upper.array() >= prev.array()).all());
    const double cov = coverage_check(b, list);
    CHECK(cov >= prev_cov);
    prev = b.upper;
    prev_cov = cov;
  }
}

TEST_CASE("bounds scale with residuals") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.3, 1.0);
  Eigen::MatrixXd R(2, 300);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = n(rng);
  const auto b1 = k_sigma_bounds(residual_stats(column_list(R)), 3.0, 0.1);
  const auto b2 = k_sigma_bounds(residual_stats(column_list(2.5 * R)), 3.0, 0.1);
  CHECK((b2.upper - 2.5 * b1.upper).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bounds json round trip") {
  const auto b = DisturbanceBounds::symmetric(Eigen::Vector3d(0.1, 0.2, 1.0 / 3.0), 3.0, 0.1);
  const auto back = bounds_from_json(bounds_to_json(b));
  CHECK(back.upper == b.upper);
  CHECK(back.lower == b.lower);
  CHECK(back.k_sigma == b.k_sigma);
  CHECK(back.dt_env == b.dt_env);
  CHECK_THROWS(DisturbanceBounds::symmetric(Eigen::Vector2d(-1.0, 1.0)).validate());
}
