#include "nnreach/scene.hpp"

#include <fstream>
#include <numbers>
#include <stdexcept>

#include "nnreach/errors.hpp"

namespace nnreach {

namespace {

void require_inside(const ShapeSet& set, const Grid& grid, const char* what) {
  if (set.dims() != grid.dims()) {
    throw std::invalid_argument(std::string("scene: ") + what + " dimension does not match grid");
  }
  std::vector<double> lo, hi;
  set.bounding_box(lo, hi);
  for (int d = 0; d < grid.dims(); ++d) {
    if (lo[d] < grid.lo()[d] || hi[d] > grid.hi()[d]) {
      throw std::invalid_argument(std::string("scene: ") + what + " extends outside the grid box");
    }
  }
}

}  // namespace

void Scene::validate() const {
  if (!grid) throw std::invalid_argument("scene: missing grid");
  require_inside(initial_set, *grid, "initial_set");
  if (!goal_set.empty()) require_inside(goal_set, *grid, "goal_set");
  if (!obstacles.empty()) require_inside(obstacles, *grid, "obstacles");
}

nlohmann::json grid_to_json(const Grid& grid) {
  return {{"lo", grid.lo()}, {"hi", grid.hi()}, {"counts", grid.counts()}};
}

GridPtr grid_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi") || !j.contains("counts")) {
    throw std::invalid_argument("grid: expected {lo, hi, counts}");
  }
  return build_grid(j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>(),
                    j.at("counts").get<std::vector<int>>());
}

Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  try {
    s.grid = grid_from_json(j.at("grid"));
    s.initial_set = shape_set_from_json(j.at("initial_set"));
    if (j.contains("goal_set") && !j.at("goal_set").empty()) s.goal_set = shape_set_from_json(j.at("goal_set"));
    if (j.contains("obstacles") && !j.at("obstacles").empty()) s.obstacles = shape_set_from_json(j.at("obstacles"));
    if (j.contains("policy")) s.policy = j.at("policy");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const Scene& scene) {
  nlohmann::json j;
  j["grid"] = grid_to_json(*scene.grid);
  j["initial_set"] = to_json(scene.initial_set);
  j["goal_set"] = scene.goal_set.empty() ? nlohmann::json::array() : to_json(scene.goal_set);
  j["obstacles"] = scene.obstacles.empty() ? nlohmann::json::array() : to_json(scene.obstacles);
  if (scene.policy) j["policy"] = *scene.policy;
  return j;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scene: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("scene: " + path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("scene: cannot write " + path.string());
  out << to_json(scene).dump(2) << '\n';
}

Scene land_scene(int nodes_per_dim) {
  Scene s;
  s.grid = build_grid({-1.5, -1.5}, {7.5, 6.5}, {nodes_per_dim, nodes_per_dim});
  s.initial_set = ShapeSet({Ball{{0.0, 0.0}, 0.7}});
  s.goal_set = ShapeSet({Ball{{6.0, 4.5}, 0.5}});
  s.obstacles = ShapeSet({Box{{1.5, 4.5}, {0.6, 0.6}}, Box{{4.0, 1.15}, {0.6, 1.05}}});
  s.validate();
  return s;
}

Scene aerial_scene(int nodes_per_dim) {
  Scene s;
  s.grid = build_grid({-1.0, -1.0, -1.0}, {7.0, 6.0, 7.0}, {nodes_per_dim, nodes_per_dim, nodes_per_dim});
  s.initial_set = ShapeSet({Box{{0.0, 0.0, 0.0}, {0.5, 0.5, 0.5}}});
  s.goal_set = ShapeSet({Box{{3.8, 4.5, 4.5}, {0.5, 0.5, 0.5}}});
  s.obstacles = ShapeSet({Cylinder{{2.0, 4.0, 3.0}, 0.5, 2, 3.0}, Cylinder{{4.0, 3.0, 3.0}, 0.5, 2, 3.0}});
  s.validate();
  return s;
}

}  // namespace nnreach
