#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnreach/dynamics.hpp"
#include "nnreach/error_bounds.hpp"
#include "nnreach/hj_solver.hpp"
#include "nnreach/oracle.hpp"
#include "nnreach/scene.hpp"

namespace nnreach::cli {

/// Parsed run configuration. The JSON document is kept as given; typed
/// sections are decoded on demand so each command only validates what it
/// uses. Relative paths resolve against the config file's directory.
struct RunConfig {
  nlohmann::json json = nlohmann::json::object();
  std::filesystem::path base = ".";
  std::filesystem::path out;
  std::uint64_t seed = 1;
  int threads = 0;
  bool strict = false;
  bool force = false;
  bool compare_mc = false;
  std::vector<double> z_slices;
  std::filesystem::path run_dir;

  /// Throws std::invalid_argument naming the file when it does not exist.
  std::filesystem::path existing(const std::string& key_or_path) const;
  std::optional<std::filesystem::path> optional_path(const std::string& key) const;

  Scene scene() const;
  SolverConfig solver() const;
  MonteCarloConfig monte_carlo(const Scene& scene, const SolverConfig& solver) const;
};

/// Reads the config file (if any) and applies flag overrides.
RunConfig load_run_config(const std::optional<std::filesystem::path>& config_path);

/// Model, policy and bounds named by the config, with their sources.
struct LoadedSystem {
  ClosedLoopSystem system;
  nlohmann::json provenance;
};

/// Builds the closed loop analysed by verify and safe-set.
LoadedSystem load_system(const RunConfig& rc, const Scene& scene);
/// True-plant closed loop with the same policy and zero bounds, for
/// Monte-Carlo ground truth.
ClosedLoopSystem true_plant(const ClosedLoopSystem& analysed, int dims);

}  // namespace nnreach::cli
