#include "nnreach/tube_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "nnreach/errors.hpp"
#include "nnreach/field_io.hpp"
#include "nnreach/scene.hpp"

namespace nnreach {

std::string to_string(TargetMode mode) { return mode == TargetMode::reach_goal ? "reach_goal" : "reach_unsafe"; }
std::string to_string(Direction direction) { return direction == Direction::backward ? "backward" : "forward"; }

TargetMode target_mode_from_string(const std::string& s) {
  if (s == "reach_goal") return TargetMode::reach_goal;
  if (s == "reach_unsafe") return TargetMode::reach_unsafe;
  throw std::invalid_argument("unknown target mode '" + s + "'");
}

Direction direction_from_string(const std::string& s) {
  if (s == "backward") return Direction::backward;
  if (s == "forward") return Direction::forward;
  throw std::invalid_argument("unknown direction '" + s + "'");
}

nlohmann::json solver_config_to_json(const SolverConfig& c) {
  return {{"horizon", c.horizon},
          {"cfl_factor", c.cfl_factor},
          {"target_mode", to_string(c.target_mode)},
          {"direction", to_string(c.direction)},
          {"snapshot_stride", c.snapshot_stride},
          {"convergence_eps", c.convergence_eps}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  try {
    c.horizon = j.value("horizon", c.horizon);
    c.cfl_factor = j.value("cfl_factor", c.cfl_factor);
    if (j.contains("target_mode")) c.target_mode = target_mode_from_string(j.at("target_mode").get<std::string>());
    if (j.contains("direction")) c.direction = direction_from_string(j.at("direction").get<std::string>());
    c.snapshot_stride = j.value("snapshot_stride", c.snapshot_stride);
    c.convergence_eps = j.value("convergence_eps", c.convergence_eps);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("solver config: ") + e.what());
  }
  c.validate();
  return c;
}

std::filesystem::path write_tube(const TubeResult& tube, const std::filesystem::path& dir, const std::string& stem) {
  if (tube.snapshots.empty()) throw std::invalid_argument("write_tube: empty tube");
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  nlohmann::json times = nlohmann::json::array();
  for (std::size_t i = 0; i < tube.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "_%04zu.csv", i);
    const std::string file = stem + name;
    write_field_csv(tube.snapshots[i].field, dir / file);
    files.push_back(file);
    times.push_back(tube.snapshots[i].time);
  }
  const auto& d = tube.diagnostics;
  nlohmann::json m;
  m["times"] = times;
  m["files"] = files;
  m["grid"] = grid_to_json(tube.snapshots.front().field.grid());
  m["config"] = solver_config_to_json(tube.config);
  m["diagnostics"] = {{"steps", d.steps},
                      {"dt_history", d.dt_history},
                      {"max_abs_hamiltonian", d.max_abs_hamiltonian},
                      {"stopped_early", d.stopped_early},
                      {"alpha", std::vector<double>(d.alpha.data(), d.alpha.data() + d.alpha.size())}};
  const auto path = dir / (stem + ".json");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << m.dump(2) << '\n';
  return path;
}

TubeResult read_tube(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::invalid_argument("cannot open tube manifest " + manifest.string());
  TubeResult res;
  try {
    const auto m = nlohmann::json::parse(in);
    const GridPtr grid = grid_from_json(m.at("grid"));
    res.config = solver_config_from_json(m.at("config"));
    const auto& files = m.at("files");
    const auto& times = m.at("times");
    if (files.size() != times.size() || files.empty()) throw FormatError("tube manifest: files/times mismatch");
    for (std::size_t i = 0; i < files.size(); ++i) {
      const double t = times[i].get<double>();
      res.snapshots.push_back({t, read_field_csv(grid, manifest.parent_path() / files[i].get<std::string>(), t)});
    }
    if (m.contains("diagnostics")) {
      const auto& d = m["diagnostics"];
      res.diagnostics.steps = d.value("steps", 0);
      res.diagnostics.dt_history = d.value("dt_history", std::vector<double>{});
      res.diagnostics.max_abs_hamiltonian = d.value("max_abs_hamiltonian", 0.0);
      res.diagnostics.stopped_early = d.value("stopped_early", false);
      const auto a = d.value("alpha", std::vector<double>{});
      res.diagnostics.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("tube manifest " + manifest.string() + ": " + e.what());
  }
  return res;
}

}  // namespace nnreach
