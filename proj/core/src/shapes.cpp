#include "nnreach/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nnreach {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dims(std::size_t expected, std::size_t got) {
  if (expected != got) throw std::invalid_argument("signed_distance: dimension mismatch");
}

double sd_ball(const Ball& b, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t d = 0; d < b.center.size(); ++d) s += (p[d] - b.center[d]) * (p[d] - b.center[d]);
  return std::sqrt(s) - b.radius;
}

double sd_box(const Box& b, std::span<const double> p) {
  double outside = 0.0;
  double inside = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < b.center.size(); ++d) {
    const double q = std::abs(p[d] - b.center[d]) - b.half_widths[d];
    outside += std::max(q, 0.0) * std::max(q, 0.0);
    inside = std::max(inside, q);
  }
  return std::sqrt(outside) + std::min(inside, 0.0);
}

double sd_cylinder(const Cylinder& c, std::span<const double> p) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < c.center.size(); ++d) {
    if (static_cast<int>(d) == c.axis) continue;
    r2 += (p[d] - c.center[d]) * (p[d] - c.center[d]);
  }
  const double qr = std::sqrt(r2) - c.radius;
  const double qa = std::abs(p[c.axis] - c.center[c.axis]) - c.half_height;
  const double outside = std::hypot(std::max(qr, 0.0), std::max(qa, 0.0));
  return outside + std::min(std::max(qr, qa), 0.0);
}

std::vector<double> json_vector(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument(std::string("shape: missing array field '") + key + "'");
  }
  return j.at(key).get<std::vector<double>>();
}

double json_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("shape: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

void validate(const ShapePrimitive& prim) {
  std::visit(overloaded{
                 [](const Ball& b) {
                   if (b.center.empty()) throw std::invalid_argument("ball: empty center");
                   if (!(b.radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
                 },
                 [](const Box& b) {
                   if (b.center.empty() || b.center.size() != b.half_widths.size()) {
                     throw std::invalid_argument("box: center and half_widths must have equal nonzero length");
                   }
                   for (double h : b.half_widths) {
                     if (!(h > 0.0)) throw std::invalid_argument("box: half_widths must be positive");
                   }
                 },
                 [](const Cylinder& c) {
                   if (c.center.size() < 2) throw std::invalid_argument("cylinder: needs at least 2 dimensions");
                   if (c.axis < 0 || c.axis >= static_cast<int>(c.center.size())) {
                     throw std::invalid_argument("cylinder: axis index out of range");
                   }
                   if (!(c.radius > 0.0)) throw std::invalid_argument("cylinder: radius must be positive");
                   if (!(c.half_height > 0.0)) throw std::invalid_argument("cylinder: half_height must be positive");
                 },
             },
             prim);
}

int shape_dims(const ShapePrimitive& prim) {
  return std::visit([](const auto& s) { return static_cast<int>(s.center.size()); }, prim);
}

std::string shape_kind(const ShapePrimitive& prim) {
  return std::visit(overloaded{[](const Ball&) { return std::string("ball"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Cylinder&) { return std::string("cylinder"); }},
                    prim);
}

void bounding_box(const ShapePrimitive& prim, std::vector<double>& lo, std::vector<double>& hi) {
  const int n = shape_dims(prim);
  lo.assign(n, 0.0);
  hi.assign(n, 0.0);
  std::visit(overloaded{
                 [&](const Ball& b) {
                   for (int d = 0; d < n; ++d) {
                     lo[d] = b.center[d] - b.radius;
                     hi[d] = b.center[d] + b.radius;
                   }
                 },
                 [&](const Box& b) {
                   for (int d = 0; d < n; ++d) {
                     lo[d] = b.center[d] - b.half_widths[d];
                     hi[d] = b.center[d] + b.half_widths[d];
                   }
                 },
                 [&](const Cylinder& c) {
                   for (int d = 0; d < n; ++d) {
                     const double ext = d == c.axis ? c.half_height : c.radius;
                     lo[d] = c.center[d] - ext;
                     hi[d] = c.center[d] + ext;
                   }
                 },
             },
             prim);
}

double signed_distance(const ShapePrimitive& prim, std::span<const double> point) {
  require_dims(static_cast<std::size_t>(shape_dims(prim)), point.size());
  return std::visit(overloaded{[&](const Ball& b) { return sd_ball(b, point); },
                               [&](const Box& b) { return sd_box(b, point); },
                               [&](const Cylinder& c) { return sd_cylinder(c, point); }},
                    prim);
}

ShapeSet::ShapeSet(std::vector<ShapePrimitive> primitives) : primitives_(std::move(primitives)) {
  if (primitives_.empty()) throw std::invalid_argument("shape set: must contain at least one primitive");
  dims_ = shape_dims(primitives_.front());
  for (const auto& p : primitives_) {
    validate(p);
    if (shape_dims(p) != dims_) throw std::invalid_argument("shape set: primitives have different dimensions");
  }
}

void ShapeSet::bounding_box(std::vector<double>& lo, std::vector<double>& hi) const {
  if (empty()) throw std::invalid_argument("shape set: empty");
  nnreach::bounding_box(primitives_.front(), lo, hi);
  std::vector<double> l, h;
  for (const auto& p : primitives_) {
    nnreach::bounding_box(p, l, h);
    for (int d = 0; d < dims_; ++d) {
      lo[d] = std::min(lo[d], l[d]);
      hi[d] = std::max(hi[d], h[d]);
    }
  }
}

double signed_distance(const ShapeSet& shape, std::span<const double> point) {
  if (shape.empty()) throw std::invalid_argument("signed_distance: empty shape set");
  require_dims(static_cast<std::size_t>(shape.dims()), point.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : shape.primitives()) best = std::min(best, signed_distance(p, point));
  return best;
}

ScalarField level_set_from_shapes(const GridPtr& grid, const ShapeSet& shape) {
  if (shape.dims() != grid->dims()) throw std::invalid_argument("level_set_from_shapes: dimension mismatch");
  std::vector<double> values(grid->num_nodes());
  const long long n = static_cast<long long>(values.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    double p[kMaxDims];
    grid->node_coordinates(static_cast<std::size_t>(i), std::span<double>(p, grid->dims()));
    values[i] = signed_distance(shape, std::span<const double>(p, grid->dims()));
  }
  return ScalarField(grid, std::move(values), 0.0);
}

nlohmann::json to_json(const ShapePrimitive& prim) {
  return std::visit(overloaded{
                        [](const Ball& b) {
                          return nlohmann::json{{"kind", "ball"}, {"center", b.center}, {"radius", b.radius}};
                        },
                        [](const Box& b) {
                          return nlohmann::json{{"kind", "box"}, {"center", b.center}, {"half_widths", b.half_widths}};
                        },
                        [](const Cylinder& c) {
                          return nlohmann::json{{"kind", "cylinder"},     {"center", c.center},
                                                {"radius", c.radius},     {"axis", c.axis},
                                                {"half_height", c.half_height}};
                        },
                    },
                    prim);
}

ShapePrimitive primitive_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("shape: expected object with 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  ShapePrimitive prim;
  if (kind == "ball") {
    prim = Ball{json_vector(j, "center"), json_number(j, "radius")};
  } else if (kind == "box") {
    prim = Box{json_vector(j, "center"), json_vector(j, "half_widths")};
  } else if (kind == "cylinder") {
    prim = Cylinder{json_vector(j, "center"), json_number(j, "radius"),
                    static_cast<int>(json_number(j, "axis")), json_number(j, "half_height")};
  } else {
    throw std::invalid_argument("shape: unknown kind '" + kind + "'");
  }
  validate(prim);
  return prim;
}

nlohmann::json to_json(const ShapeSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : set.primitives()) arr.push_back(to_json(p));
  return arr;
}

ShapeSet shape_set_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("shape set: expected an array of primitives");
  std::vector<ShapePrimitive> prims;
  for (const auto& item : j) prims.push_back(primitive_from_json(item));
  return ShapeSet(std::move(prims));
}

}  // namespace nnreach
