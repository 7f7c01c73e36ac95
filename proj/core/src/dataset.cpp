#include "nnreach/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nnreach/errors.hpp"

namespace nnreach {

TransitionDataset::TransitionDataset(int state_dim, int action_dim) : state_dim_(state_dim), action_dim_(action_dim) {
  if (state_dim <= 0 || action_dim < 0) throw std::invalid_argument("dataset: invalid dimensions");
}

void TransitionDataset::add(Transition t) {
  if (t.state.size() != state_dim_ || t.action.size() != action_dim_ || t.delta.size() != state_dim_) {
    throw std::invalid_argument("dataset: tuple dimensions do not match the dataset");
  }
  tuples_.push_back(std::move(t));
  validation_.push_back(0);
}

void TransitionDataset::append(const TransitionDataset& other) {
  if (other.state_dim_ != state_dim_ || other.action_dim_ != action_dim_) {
    throw std::invalid_argument("dataset: cannot append datasets of different dimensions");
  }
  for (std::size_t i = 0; i < other.size(); ++i) {
    tuples_.push_back(other.tuples_[i]);
    validation_.push_back(other.validation_[i]);
  }
}

void TransitionDataset::split(double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw std::invalid_argument("dataset: bad train fraction");
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(size())));
  for (std::size_t k = 0; k < order.size(); ++k) validation_[order[k]] = k < n_train ? 0 : 1;
}

std::vector<std::size_t> TransitionDataset::train_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!validation_[i]) idx.push_back(i);
  }
  return idx;
}

std::vector<std::size_t> TransitionDataset::validation_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (validation_[i]) idx.push_back(i);
  }
  return idx;
}

Eigen::MatrixXd TransitionDataset::inputs(const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd m(state_dim_ + action_dim_, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    m.col(c).head(state_dim_) = tuples_[idx[k]].state;
    m.col(c).tail(action_dim_) = tuples_[idx[k]].action;
  }
  return m;
}

Eigen::MatrixXd TransitionDataset::targets(const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd m(state_dim_, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = tuples_[idx[k]].delta;
  return m;
}

void save_dataset_csv(const TransitionDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (int i = 0; i < data.state_dim(); ++i) out << 's' << i << ',';
  for (int i = 0; i < data.action_dim(); ++i) out << 'a' << i << ',';
  for (int i = 0; i < data.state_dim(); ++i) out << "ds" << i << ',';
  out << "split\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& t = data[k];
    for (Eigen::Index i = 0; i < t.state.size(); ++i) out << t.state[i] << ',';
    for (Eigen::Index i = 0; i < t.action.size(); ++i) out << t.action[i] << ',';
    for (Eigen::Index i = 0; i < t.delta.size(); ++i) out << t.delta[i] << ',';
    out << (data.is_validation(k) ? "validation" : "train") << '\n';
  }
}

TransitionDataset load_dataset_csv(const std::filesystem::path& path, int state_dim, int action_dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  TransitionDataset data(state_dim, action_dim);
  std::string line;
  std::getline(in, line);
  const int cols = 2 * state_dim + action_dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    std::string split;
    for (int c = 0; c <= cols && std::getline(ss, cell, ','); ++c) {
      if (c < cols) {
        v.push_back(std::stod(cell));
      } else {
        split = cell;
      }
    }
    if (static_cast<int>(v.size()) != cols) throw FormatError("dataset csv: short row in " + path.string());
    Transition t;
    t.state = Eigen::Map<Eigen::VectorXd>(v.data(), state_dim);
    t.action = Eigen::Map<Eigen::VectorXd>(v.data() + state_dim, action_dim);
    t.delta = Eigen::Map<Eigen::VectorXd>(v.data() + state_dim + action_dim, state_dim);
    data.add(std::move(t));
    data.set_validation(data.size() - 1, split == "validation");
  }
  return data;
}

}  // namespace nnreach
