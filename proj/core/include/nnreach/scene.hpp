#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "nnreach/grid.hpp"
#include "nnreach/shapes.hpp"

namespace nnreach {

/// Scene description: grid, initial set, goal set and obstacles. Each
/// obstacle primitive is a separate constrained region. An optional "policy"
/// entry carries a constant or tabulated controller.
struct Scene {
  GridPtr grid;
  ShapeSet initial_set;
  ShapeSet goal_set;
  ShapeSet obstacles;
  std::optional<nlohmann::json> policy;

  /// Throws std::invalid_argument when a set does not match the grid
  /// dimension or does not lie inside the grid box.
  void validate() const;
};

Scene scene_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scene& scene);
Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

nlohmann::json grid_to_json(const Grid& grid);
GridPtr grid_from_json(const nlohmann::json& j);

/// Land navigation benchmark: initial disc at (0,0) r=0.7, goal disc at
/// (6,4.5) r=0.5, rectangular obstacles at (1.5,4.5) and (4,1.15).
Scene land_scene(int nodes_per_dim = 101);
/// Aerial navigation benchmark: initial and goal cuboids, two cylindrical
/// obstacles of height 6 standing on z = 0.
Scene aerial_scene(int nodes_per_dim = 71);

}  // namespace nnreach
