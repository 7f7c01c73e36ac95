#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnreach/grid.hpp"

namespace nnreach {

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

/// Axis-aligned box.
struct Box {
  std::vector<double> center;
  std::vector<double> half_widths;
};

/// Cylinder whose axis is parallel to coordinate `axis`. In n dimensions the
/// radial distance is measured over every coordinate except `axis`.
struct Cylinder {
  std::vector<double> center;
  double radius = 0.0;
  int axis = 0;
  double half_height = 0.0;
};

using ShapePrimitive = std::variant<Ball, Box, Cylinder>;

/// Throws std::invalid_argument when a size parameter is not strictly positive
/// or vectors have inconsistent lengths.
void validate(const ShapePrimitive& prim);
int shape_dims(const ShapePrimitive& prim);
std::string shape_kind(const ShapePrimitive& prim);
/// Axis-aligned bounding box [lo, hi] of the primitive.
void bounding_box(const ShapePrimitive& prim, std::vector<double>& lo, std::vector<double>& hi);

/// Exact Euclidean signed distance: negative inside, zero on the boundary.
double signed_distance(const ShapePrimitive& prim, std::span<const double> point);

/// Nonempty union of primitives with a common dimension.
class ShapeSet {
 public:
  ShapeSet() = default;
  explicit ShapeSet(std::vector<ShapePrimitive> primitives);

  int dims() const { return dims_; }
  bool empty() const { return primitives_.empty(); }
  std::size_t size() const { return primitives_.size(); }
  const std::vector<ShapePrimitive>& primitives() const { return primitives_; }
  const ShapePrimitive& operator[](std::size_t i) const { return primitives_[i]; }
  ShapeSet subset(std::size_t i) const { return ShapeSet({primitives_[i]}); }
  void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const;

 private:
  std::vector<ShapePrimitive> primitives_;
  int dims_ = 0;
};

/// min over member signed distances. Throws std::invalid_argument on a
/// dimension mismatch or an empty set.
double signed_distance(const ShapeSet& shape, std::span<const double> point);

/// Samples the signed distance at every grid node.
ScalarField level_set_from_shapes(const GridPtr& grid, const ShapeSet& shape);

// JSON encoding: {"kind": "ball", "center": [...], "radius": r},
// {"kind": "box", "center": [...], "half_widths": [...]},
// {"kind": "cylinder", "center": [...], "radius": r, "axis": i, "half_height": h}.
nlohmann::json to_json(const ShapePrimitive& prim);
ShapePrimitive primitive_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ShapeSet& set);
ShapeSet shape_set_from_json(const nlohmann::json& j);

}  // namespace nnreach
