#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "nnreach/mlp.hpp"

namespace nnreach {

/// {"layer_sizes", "hidden_activation", "output_activation",
///  "weights": [row-major matrices], "biases", "output_scale",
///  "meta": {"n", "m", "dt_env", "role"}}
nlohmann::json model_to_json(const MlpModel& model);
/// Throws FormatError on missing fields or shapes that disagree with
/// layer_sizes.
MlpModel model_from_json(const nlohmann::json& j);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace nnreach
