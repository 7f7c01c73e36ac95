#include "nnreach/error_bounds.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "nnreach/errors.hpp"

namespace nnreach {

DisturbanceBounds DisturbanceBounds::zero(int n) {
  return symmetric(Eigen::VectorXd::Zero(n));
}

DisturbanceBounds DisturbanceBounds::symmetric(Eigen::VectorXd upper, double k_sigma, double dt_env) {
  DisturbanceBounds b;
  b.lower = -upper;
  b.upper = std::move(upper);
  b.k_sigma = k_sigma;
  b.dt_env = dt_env;
  b.validate();
  return b;
}

bool DisturbanceBounds::contains(const Eigen::VectorXd& d, double tol) const {
  if (d.size() != upper.size()) return false;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] > upper[i] + tol || d[i] < lower[i] - tol) return false;
  }
  return true;
}

void DisturbanceBounds::validate() const {
  if (upper.size() != lower.size()) throw std::invalid_argument("bounds: upper/lower length mismatch");
  for (Eigen::Index i = 0; i < upper.size(); ++i) {
    if (!std::isfinite(upper[i]) || !std::isfinite(lower[i]) || upper[i] < 0.0 || lower[i] > 0.0) {
      throw std::invalid_argument("bounds: need upper >= 0 >= lower, finite");
    }
  }
  if (!(dt_env > 0.0)) throw std::invalid_argument("bounds: dt_env must be positive");
}

DisturbanceBounds DisturbanceBounds::scaled(double factor) const {
  DisturbanceBounds b = *this;
  b.upper *= factor;
  b.lower *= factor;
  b.validate();
  return b;
}

std::vector<Eigen::VectorXd> residual_list(const MlpModel& model, const TransitionDataset& data) {
  const auto idx = data.validation_indices();
  std::vector<Eigen::VectorXd> out;
  if (idx.empty()) return out;
  const Eigen::MatrixXd pred = model.forward_batch(data.inputs(idx));
  const Eigen::MatrixXd diff = pred - data.targets(idx);
  out.reserve(idx.size());
  for (Eigen::Index c = 0; c < diff.cols(); ++c) out.emplace_back(diff.col(c));
  return out;
}

ResidualStats residual_stats(const std::vector<Eigen::VectorXd>& residuals) {
  if (residuals.empty()) throw std::invalid_argument("residuals: empty residual set");
  const Eigen::Index n = residuals.front().size();
  ResidualStats s;
  s.count = residuals.size();
  s.mean = Eigen::VectorXd::Zero(n);
  s.min = residuals.front();
  s.max = residuals.front();
  for (const auto& r : residuals) {
    s.mean += r;
    s.min = s.min.cwiseMin(r);
    s.max = s.max.cwiseMax(r);
  }
  s.mean /= static_cast<double>(s.count);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
  for (const auto& r : residuals) var += (r - s.mean).cwiseAbs2();
  s.sd = (var / static_cast<double>(s.count)).cwiseSqrt();
  return s;
}

ResidualStats residuals(const MlpModel& model, const TransitionDataset& validation) {
  const auto list = residual_list(model, validation);
  if (list.empty()) throw std::invalid_argument("residuals: empty validation set");
  return residual_stats(list);
}

DisturbanceBounds k_sigma_bounds(const ResidualStats& stats, double k, double dt_env) {
  if (!(k > 0.0)) throw std::invalid_argument("k_sigma_bounds: k must be positive");
  if (!(dt_env > 0.0)) throw std::invalid_argument("k_sigma_bounds: dt_env must be positive");
  Eigen::VectorXd upper = (stats.mean.cwiseAbs() + k * stats.sd) / dt_env;
  return DisturbanceBounds::symmetric(std::move(upper), k, dt_env);
}

double coverage_check(const DisturbanceBounds& bounds, const std::vector<Eigen::VectorXd>& residuals) {
  if (residuals.empty()) throw std::invalid_argument("coverage_check: empty residual list");
  std::size_t inside = 0;
  for (const auto& r : residuals) {
    if (bounds.contains(r / bounds.dt_env, 0.0)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(residuals.size());
}

Eigen::VectorXd coverage_per_dimension(const DisturbanceBounds& bounds, const std::vector<Eigen::VectorXd>& residuals) {
  if (residuals.empty()) throw std::invalid_argument("coverage_check: empty residual list");
  Eigen::VectorXd inside = Eigen::VectorXd::Zero(bounds.dims());
  for (const auto& r : residuals) {
    const Eigen::VectorXd rate = r / bounds.dt_env;
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      if (rate[i] <= bounds.upper[i] && rate[i] >= bounds.lower[i]) inside[i] += 1.0;
    }
  }
  return inside / static_cast<double>(residuals.size());
}

nlohmann::json bounds_to_json(const DisturbanceBounds& b) {
  return {{"upper", std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size())},
          {"lower", std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size())},
          {"k_sigma", b.k_sigma},
          {"dt_env", b.dt_env}};
}

DisturbanceBounds bounds_from_json(const nlohmann::json& j) {
  try {
    const auto up = j.at("upper").get<std::vector<double>>();
    const auto lo = j.at("lower").get<std::vector<double>>();
    DisturbanceBounds b;
    b.upper = Eigen::Map<const Eigen::VectorXd>(up.data(), static_cast<Eigen::Index>(up.size()));
    b.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    b.k_sigma = j.value("k_sigma", 0.0);
    b.dt_env = j.value("dt_env", 1.0);
    b.validate();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bounds: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("bounds: ") + e.what());
  }
}

void save_bounds(const DisturbanceBounds& b, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bounds_to_json(b).dump(2) << '\n';
}

DisturbanceBounds load_bounds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("bounds: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bounds: " + path.string() + ": " + e.what());
  }
  return bounds_from_json(j);
}

}  // namespace nnreach
