#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace nnreach {

inline constexpr int kMaxDims = 4;

/// Node-centred rectilinear grid over a box in state space. Nodes include
/// both endpoints, so spacing[i] = (hi[i] - lo[i]) / (counts[i] - 1).
/// Flat indices are row-major: the last dimension varies fastest.
class Grid {
 public:
  /// Throws std::invalid_argument on mismatched lengths, lo >= hi, counts < 3
  /// or more than kMaxDims dimensions.
  Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> counts);

  int dims() const { return static_cast<int>(lo_.size()); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<double>& spacing() const { return spacing_; }
  double spacing(int d) const { return spacing_[d]; }
  int count(int d) const { return counts_[d]; }
  std::size_t stride(int d) const { return strides_[d]; }
  std::size_t num_nodes() const { return num_nodes_; }
  double max_spacing() const;
  /// Length of the box diagonal.
  double diameter() const;

  std::size_t flat_index(std::span<const int> index) const;
  void multi_index(std::size_t flat, std::span<int> index) const;
  double coordinate(int d, int i) const { return lo_[d] + i * spacing_[d]; }
  void node_coordinates(std::size_t flat, std::span<double> point) const;
  std::vector<double> node_coordinates(std::size_t flat) const;

  bool contains(std::span<const double> point, double tol = 1e-12) const;

  bool operator==(const Grid& other) const;

 private:
  std::vector<double> lo_, hi_, spacing_;
  std::vector<int> counts_;
  std::vector<std::size_t> strides_;
  std::size_t num_nodes_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> counts);

/// Same object or equal geometry.
bool same_grid(const GridPtr& a, const GridPtr& b);

/// Boolean set over grid nodes.
struct Mask {
  GridPtr grid;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(GridPtr g, bool value);

  bool operator[](std::size_t i) const { return bits[i] != 0; }
  std::size_t count() const;
  bool any() const { return count() > 0; }
  std::size_t size() const { return bits.size(); }
  bool operator==(const Mask& other) const { return bits == other.bits; }
};

Mask mask_and(const Mask& a, const Mask& b);
Mask mask_or(const Mask& a, const Mask& b);
Mask mask_not(const Mask& a);
/// a AND NOT b
Mask mask_minus(const Mask& a, const Mask& b);
/// True when every set node of a is set in b.
bool mask_subset(const Mask& a, const Mask& b);

/// One real value per grid node plus a time tag (seconds).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, double fill = 0.0, double time_tag = 0.0);
  /// Throws std::invalid_argument if values.size() != grid->num_nodes() or any
  /// value is non-finite.
  ScalarField(GridPtr grid, std::vector<double> values, double time_tag);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time_tag() const { return time_tag_; }
  void set_time_tag(double t) { time_tag_ = t; }

  bool all_finite() const;
  double max_abs() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  double time_tag_ = 0.0;
};

ScalarField field_union(const ScalarField& a, const ScalarField& b);
ScalarField field_intersection(const ScalarField& a, const ScalarField& b);
ScalarField field_complement(const ScalarField& a);

/// value <= 0 counts as inside.
Mask zero_sublevel_mask(const ScalarField& field);
/// value < 0; the logical complement of zero_sublevel_mask(field_complement(f)).
Mask strict_sublevel_mask(const ScalarField& field);

/// Multilinear interpolation over the containing cell. Throws
/// std::invalid_argument when the point is outside the grid box.
double interpolate(const ScalarField& field, std::span<const double> point);

/// Central-difference gradient of the interpolant at an off-grid point,
/// one-sided near the boundary.
std::vector<double> interpolate_gradient(const ScalarField& field, std::span<const double> point);

}  // namespace nnreach
