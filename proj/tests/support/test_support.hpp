#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nnreach/grid.hpp"
#include "nnreach/mlp.hpp"

namespace nnreach::testing {

/// Distance from x to the segment [a, b].
inline double segment_distance(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b) {
  double ab2 = 0.0, t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    t += (x[i] - a[i]) * (b[i] - a[i]);
  }
  t = ab2 > 0.0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = a[i] + t * (b[i] - a[i]);
    d2 += (x[i] - p) * (x[i] - p);
  }
  return std::sqrt(d2);
}

/// Signed distance to the capsule of radius r around [a, b].
inline double capsule_sd(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b,
                         double r) {
  return segment_distance(x, a, b) - r;
}

inline Mask capsule_mask(const GridPtr& grid, const std::vector<double>& a, const std::vector<double>& b, double r) {
  Mask m(grid, false);
  for (std::size_t k = 0; k < grid->num_nodes(); ++k)
    m.bits[k] = capsule_sd(grid->node_coordinates(k), a, b, r) <= 0.0 ? 1 : 0;
  return m;
}

/// Nodes of `m` with at least one axis neighbour outside `m`.
inline std::vector<std::size_t> mask_boundary(const Mask& m) {
  const Grid& g = *m.grid;
  std::vector<std::size_t> out;
  std::vector<int> idx(g.dims());
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    if (!m[k]) continue;
    g.multi_index(k, idx);
    bool edge = false;
    for (int d = 0; d < g.dims() && !edge; ++d) {
      if (idx[d] > 0 && !m[k - g.stride(d)]) edge = true;
      if (idx[d] + 1 < g.count(d) && !m[k + g.stride(d)]) edge = true;
    }
    if (edge) out.push_back(k);
  }
  return out;
}

inline double node_distance(const Grid& g, std::size_t a, std::size_t b) {
  const auto x = g.node_coordinates(a);
  const auto y = g.node_coordinates(b);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

/// Hausdorff distance between the node sets of two masks; infinity if
/// exactly one is empty.
inline double mask_hausdorff(const Mask& a, const Mask& b) {
  if (!a.any() && !b.any()) return 0.0;
  if (!a.any() || !b.any()) return std::numeric_limits<double>::infinity();
  const Grid& g = *a.grid;
  auto one_sided = [&](const Mask& from, const Mask& to) {
    const auto edge = mask_boundary(to);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      if (!from[k] || to[k]) continue;
      double best = std::numeric_limits<double>::infinity();
      for (auto e : edge) best = std::min(best, node_distance(g, k, e));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

/// Zero crossings of a 2-D field along grid edges (linear interpolation).
inline std::vector<std::vector<double>> zero_crossings_2d(const ScalarField& f) {
  const Grid& g = f.grid();
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < g.count(0); ++i) {
    for (int j = 0; j < g.count(1); ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * g.stride(0) + static_cast<std::size_t>(j);
      const auto x = g.node_coordinates(k);
      for (int d = 0; d < 2; ++d) {
        const int id = d == 0 ? i : j;
        if (id + 1 >= g.count(d)) continue;
        const double v0 = f[k], v1 = f[k + g.stride(d)];
        if ((v0 <= 0.0) == (v1 <= 0.0)) continue;
        const double t = v0 / (v0 - v1);
        auto p = x;
        p[d] += t * g.spacing(d);
        pts.push_back(p);
      }
    }
  }
  return pts;
}

/// Naive per-neuron forward pass used as an independent oracle.
inline Eigen::VectorXd naive_forward(const MlpModel& model, const Eigen::VectorXd& x) {
  auto act = [](Activation a, double v) {
    switch (a) {
      case Activation::tanh: return std::tanh(v);
      case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
      case Activation::relu: return v > 0.0 ? v : 0.0;
      case Activation::linear: return v;
    }
    return v;
  };
  std::vector<double> y(x.data(), x.data() + x.size());
  for (int l = 0; l < model.num_layers(); ++l) {
    const auto& W = model.weights(l);
    const auto& b = model.biases(l);
    std::vector<double> z(W.rows());
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      double s = b[r];
      for (Eigen::Index c = 0; c < W.cols(); ++c) s += W(r, c) * y[c];
      z[r] = act(l + 1 == model.num_layers() ? model.output_activation() : model.hidden_activation(), s);
    }
    y = z;
  }
  Eigen::VectorXd out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = model.output_scale()[i] * y[i];
  return out;
}

}  // namespace nnreach::testing
