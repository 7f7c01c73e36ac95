#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "nnreach/hj_solver.hpp"

namespace nnreach {

nlohmann::json solver_config_to_json(const SolverConfig& config);
/// Missing keys keep their defaults. Unknown mode/direction strings raise
/// std::invalid_argument.
SolverConfig solver_config_from_json(const nlohmann::json& j);

std::string to_string(TargetMode mode);
std::string to_string(Direction direction);
TargetMode target_mode_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

/// Writes <dir>/<stem>_NNNN.csv for each snapshot and <dir>/<stem>.json with
/// {times, files, grid, config, diagnostics}. Returns the manifest path.
std::filesystem::path write_tube(const TubeResult& tube, const std::filesystem::path& dir, const std::string& stem);
TubeResult read_tube(const std::filesystem::path& manifest);

}  // namespace nnreach
