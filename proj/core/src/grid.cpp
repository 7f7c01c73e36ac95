#include "nnreach/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nnreach {

Grid::Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> counts)
    : lo_(std::move(lo)), hi_(std::move(hi)), counts_(std::move(counts)) {
  if (lo_.size() != hi_.size() || lo_.size() != counts_.size()) {
    throw std::invalid_argument("grid: lo, hi and counts must have equal lengths");
  }
  if (lo_.empty() || lo_.size() > static_cast<std::size_t>(kMaxDims)) {
    throw std::invalid_argument("grid: dimension must be between 1 and 4");
  }
  const int n = dims();
  spacing_.resize(n);
  strides_.resize(n);
  for (int d = 0; d < n; ++d) {
    if (!std::isfinite(lo_[d]) || !std::isfinite(hi_[d]) || !(lo_[d] < hi_[d])) {
      std::ostringstream os;
      os << "grid: degenerate bounds in dimension " << d << " (lo=" << lo_[d] << ", hi=" << hi_[d] << ")";
      throw std::invalid_argument(os.str());
    }
    if (counts_[d] < 3) {
      std::ostringstream os;
      os << "grid: counts[" << d << "]=" << counts_[d] << " but at least 3 nodes are required";
      throw std::invalid_argument(os.str());
    }
    spacing_[d] = (hi_[d] - lo_[d]) / (counts_[d] - 1);
  }
  std::size_t stride = 1;
  for (int d = n - 1; d >= 0; --d) {
    strides_[d] = stride;
    stride *= static_cast<std::size_t>(counts_[d]);
  }
  num_nodes_ = stride;
}

double Grid::max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

double Grid::diameter() const {
  double s = 0.0;
  for (int d = 0; d < dims(); ++d) s += (hi_[d] - lo_[d]) * (hi_[d] - lo_[d]);
  return std::sqrt(s);
}

std::size_t Grid::flat_index(std::span<const int> index) const {
  std::size_t flat = 0;
  for (int d = 0; d < dims(); ++d) flat += static_cast<std::size_t>(index[d]) * strides_[d];
  return flat;
}

void Grid::multi_index(std::size_t flat, std::span<int> index) const {
  for (int d = 0; d < dims(); ++d) {
    index[d] = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
  }
}

void Grid::node_coordinates(std::size_t flat, std::span<double> point) const {
  for (int d = 0; d < dims(); ++d) {
    const int i = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
    point[d] = coordinate(d, i);
  }
}

std::vector<double> Grid::node_coordinates(std::size_t flat) const {
  std::vector<double> p(dims());
  node_coordinates(flat, p);
  return p;
}

bool Grid::contains(std::span<const double> point, double tol) const {
  if (point.size() != lo_.size()) return false;
  for (int d = 0; d < dims(); ++d) {
    if (!(point[d] >= lo_[d] - tol && point[d] <= hi_[d] + tol)) return false;
  }
  return true;
}

bool Grid::operator==(const Grid& other) const {
  return lo_ == other.lo_ && hi_ == other.hi_ && counts_ == other.counts_;
}

GridPtr build_grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> counts) {
  return std::make_shared<const Grid>(std::move(lo), std::move(hi), std::move(counts));
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) return false;
  return a == b || *a == *b;
}

// ---------------------------------------------------------------------------

Mask::Mask(GridPtr g, bool value) : grid(std::move(g)), bits(grid->num_nodes(), value ? 1 : 0) {}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

namespace {

void require_same(const Mask& a, const Mask& b) {
  if (!same_grid(a.grid, b.grid) || a.bits.size() != b.bits.size()) {
    throw std::invalid_argument("mask: grid mismatch");
  }
}

template <typename Op>
Mask combine(const Mask& a, const Mask& b, Op op) {
  require_same(a, b);
  Mask out(a.grid, false);
  for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = op(a.bits[i] != 0, b.bits[i] != 0) ? 1 : 0;
  return out;
}

void require_same(const ScalarField& a, const ScalarField& b) {
  if (!same_grid(a.grid_ptr(), b.grid_ptr())) throw std::invalid_argument("field: grid mismatch");
}

}  // namespace

Mask mask_and(const Mask& a, const Mask& b) { return combine(a, b, [](bool x, bool y) { return x && y; }); }
Mask mask_or(const Mask& a, const Mask& b) { return combine(a, b, [](bool x, bool y) { return x || y; }); }
Mask mask_minus(const Mask& a, const Mask& b) { return combine(a, b, [](bool x, bool y) { return x && !y; }); }

Mask mask_not(const Mask& a) {
  Mask out(a.grid, false);
  for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] ? 0 : 1;
  return out;
}

bool mask_subset(const Mask& a, const Mask& b) {
  require_same(a, b);
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    if (a.bits[i] && !b.bits[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid, double fill, double time_tag)
    : grid_(std::move(grid)), values_(grid_->num_nodes(), fill), time_tag_(time_tag) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values, double time_tag)
    : grid_(std::move(grid)), values_(std::move(values)), time_tag_(time_tag) {
  if (!grid_) throw std::invalid_argument("field: null grid");
  if (values_.size() != grid_->num_nodes()) {
    throw std::invalid_argument("field: value count does not match grid node count");
  }
  if (!all_finite()) throw std::invalid_argument("field: non-finite value");
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField field_union(const ScalarField& a, const ScalarField& b) {
  require_same(a, b);
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(a[i], b[i]);
  return out;
}

ScalarField field_intersection(const ScalarField& a, const ScalarField& b) {
  require_same(a, b);
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

ScalarField field_complement(const ScalarField& a) {
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -a[i];
  return out;
}

Mask zero_sublevel_mask(const ScalarField& field) {
  Mask m(field.grid_ptr(), false);
  for (std::size_t i = 0; i < field.size(); ++i) m.bits[i] = field[i] <= 0.0 ? 1 : 0;
  return m;
}

Mask strict_sublevel_mask(const ScalarField& field) {
  Mask m(field.grid_ptr(), false);
  for (std::size_t i = 0; i < field.size(); ++i) m.bits[i] = field[i] < 0.0 ? 1 : 0;
  return m;
}

double interpolate(const ScalarField& field, std::span<const double> point) {
  const Grid& g = field.grid();
  const int n = g.dims();
  if (static_cast<int>(point.size()) != n) throw std::invalid_argument("interpolate: dimension mismatch");
  if (!g.contains(point, 1e-9)) throw std::invalid_argument("interpolate: point outside grid bounds");

  int base[kMaxDims];
  double frac[kMaxDims];
  for (int d = 0; d < n; ++d) {
    double u = (point[d] - g.lo()[d]) / g.spacing(d);
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, g.count(d) - 2);
    base[d] = i;
    double t = std::clamp(u - i, 0.0, 1.0);
    // snap node queries so they return the stored value bit-exactly
    if (t < 1e-10) t = 0.0;
    if (t > 1.0 - 1e-10) t = 1.0;
    frac[d] = t;
  }

  double result = 0.0;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      const int bit = (c >> d) & 1;
      w *= bit ? frac[d] : 1.0 - frac[d];
      flat += static_cast<std::size_t>(base[d] + bit) * g.stride(d);
    }
    if (w != 0.0) result += w * field[flat];
  }
  return result;
}

std::vector<double> interpolate_gradient(const ScalarField& field, std::span<const double> point) {
  const Grid& g = field.grid();
  const int n = g.dims();
  std::vector<double> grad(n, 0.0);
  std::vector<double> a(point.begin(), point.end());
  std::vector<double> b(point.begin(), point.end());
  for (int d = 0; d < n; ++d) {
    const double h = 0.5 * g.spacing(d);
    a[d] = std::max(point[d] - h, g.lo()[d]);
    b[d] = std::min(point[d] + h, g.hi()[d]);
    grad[d] = (interpolate(field, b) - interpolate(field, a)) / (b[d] - a[d]);
    a[d] = point[d];
    b[d] = point[d];
  }
  return grad;
}

}  // namespace nnreach
