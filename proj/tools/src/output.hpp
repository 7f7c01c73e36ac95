#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nnreach::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Output directory that records every file a command writes and emits the
/// manifest entry for the command.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  /// Path for `name` inside the directory; the file is listed in the manifest.
  std::filesystem::path file(const std::string& name);
  void record(const std::filesystem::path& path);
  void write_json(const std::string& name, const nlohmann::json& j);

  /// Merges {command: {seed, files: {path: sha256}, config, created_utc}} into
  /// manifest.json. The timestamp lives only here.
  void write_manifest(const std::string& command, std::uint64_t seed, const nlohmann::json& config) const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

/// Deterministic JSON text: 2-space indent, trailing newline, full double
/// precision.
std::string dump_json(const nlohmann::json& j);

}  // namespace nnreach::cli
