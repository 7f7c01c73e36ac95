#include "run_config.hpp"

#include <fstream>
#include <stdexcept>

#include "nnreach/dataset.hpp"
#include "nnreach/errors.hpp"
#include "nnreach/model_io.hpp"
#include "nnreach/tube_io.hpp"

namespace nnreach::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path RunConfig::existing(const std::string& p) const {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  if (!fs::exists(path)) throw std::invalid_argument("missing file: " + path.string());
  return path;
}

std::optional<fs::path> RunConfig::optional_path(const std::string& key) const {
  if (!json.contains(key) || json.at(key).is_null()) return std::nullopt;
  if (!json.at(key).is_string()) throw std::invalid_argument("config: '" + key + "' must be a path");
  return existing(json.at(key).get<std::string>());
}

Scene RunConfig::scene() const {
  if (!json.contains("scene")) throw std::invalid_argument("config: missing 'scene'");
  const auto& s = json.at("scene");
  if (s.is_string()) return load_scene(existing(s.get<std::string>()));
  if (s.is_object()) return scene_from_json(s);
  throw std::invalid_argument("config: 'scene' must be a path or an object");
}

SolverConfig RunConfig::solver() const {
  return solver_config_from_json(json.value("solver", json::object()));
}

MonteCarloConfig RunConfig::monte_carlo(const Scene& scene, const SolverConfig& solver) const {
  MonteCarloConfig mc;
  mc.horizon = solver.horizon;
  if (json.contains("monte_carlo")) {
    const auto& j = json.at("monte_carlo");
    mc.num_samples = j.value("num_samples", mc.num_samples);
    mc.num_disturbance_draws = j.value("num_disturbance_draws", mc.num_disturbance_draws);
    mc.include_zero_draw = j.value("include_zero_draw", mc.include_zero_draw);
    mc.horizon = j.value("horizon", mc.horizon);
    mc.dt = j.value("dt", mc.dt);
  }
  if (mc.num_samples < 1 || mc.num_disturbance_draws < 0 || !(mc.horizon > 0.0) || !(mc.dt > 0.0)) {
    throw std::invalid_argument("config: invalid monte_carlo section");
  }
  mc.seed = seed;
  mc.domain = scene.grid;
  return mc;
}

RunConfig load_run_config(const std::optional<fs::path>& config_path) {
  RunConfig rc;
  if (config_path) {
    if (!fs::exists(*config_path)) throw std::invalid_argument("missing file: " + config_path->string());
    std::ifstream in(*config_path);
    try {
      rc.json = json::parse(in);
    } catch (const json::parse_error& e) {
      throw FormatError("config " + config_path->string() + ": " + e.what());
    }
    if (!rc.json.is_object()) throw FormatError("config " + config_path->string() + ": expected an object");
    rc.base = config_path->parent_path().empty() ? fs::path(".") : config_path->parent_path();
  }
  rc.seed = rc.json.value("seed", rc.seed);
  rc.threads = rc.json.value("threads", rc.threads);
  if (rc.json.contains("out")) rc.out = rc.base / rc.json.at("out").get<std::string>();
  return rc;
}

LoadedSystem load_system(const RunConfig& rc, const Scene& scene) {
  const int n = scene.grid->dims();
  json prov = json::object();
  std::optional<fs::path> dir;
  if (rc.json.contains("artifacts")) dir = rc.existing(rc.json.at("artifacts").get<std::string>());
  auto artifact = [&](const std::string& key, const std::string& file) -> std::optional<fs::path> {
    if (auto p = rc.optional_path(key)) return p;
    if (dir && fs::exists(*dir / file)) return *dir / file;
    return std::nullopt;
  };

  Policy policy;
  if (auto p = artifact("policy", "policy.json")) {
    policy = load_policy(*p);
    prov["policy"] = p->string();
  } else if (scene.policy) {
    policy = policy_from_json(*scene.policy);
    prov["policy"] = "scene";
  } else {
    throw std::invalid_argument("config: no policy (set 'policy', 'artifacts' or a scene policy)");
  }

  std::optional<MlpModel> model;
  if (auto p = artifact("model", "model.json")) {
    model = load_model(*p);
    prov["model"] = p->string();
  }

  DisturbanceBounds bounds = DisturbanceBounds::zero(n);
  if (rc.json.contains("bounds") && rc.json.at("bounds").is_object()) {
    bounds = bounds_from_json(rc.json.at("bounds"));
    prov["bounds"] = "inline";
  } else if (auto p = artifact("bounds", "bounds.json")) {
    bounds = load_bounds(*p);
    prov["bounds"] = p->string();
  } else if (rc.json.contains("k_sigma")) {
    if (!model) throw std::invalid_argument("config: 'k_sigma' needs a model to compute residuals");
    const auto data_path = artifact("dataset", "dataset.csv");
    if (!data_path) throw std::invalid_argument("config: 'k_sigma' needs a 'dataset'");
    TransitionDataset data = load_dataset_csv(*data_path, n, policy.action_dim());
    data.split(0.8, rc.seed);
    const double k = rc.json.at("k_sigma").get<double>();
    bounds = k_sigma_bounds(residuals(*model, data), k, model->meta().dt_env);
    prov["bounds"] = {{"k_sigma", k}, {"dataset", data_path->string()}};
  } else {
    prov["bounds"] = "zero";
  }

  std::string plant = rc.json.value("plant", std::string());
  if (plant.empty()) plant = model ? "learned" : (n == 2 ? "true_land" : "true_air");
  prov["plant"] = plant;
  if (plant == "learned") {
    if (!model) throw std::invalid_argument("config: plant 'learned' needs a model");
    return {ClosedLoopSystem::learned(std::move(*model), std::move(policy), std::move(bounds)), prov};
  }
  if (plant == "true_land") return {ClosedLoopSystem::true_land(std::move(policy), std::move(bounds)), prov};
  if (plant == "true_air") return {ClosedLoopSystem::true_air(std::move(policy), std::move(bounds)), prov};
  throw std::invalid_argument("config: unknown plant '" + plant + "'");
}

ClosedLoopSystem true_plant(const ClosedLoopSystem& analysed, int dims) {
  if (dims == 2) return ClosedLoopSystem::true_land(analysed.policy(), DisturbanceBounds::zero(2));
  if (dims == 3) return ClosedLoopSystem::true_air(analysed.policy(), DisturbanceBounds::zero(3));
  throw std::invalid_argument("no true plant for dimension " + std::to_string(dims));
}

}  // namespace nnreach::cli
