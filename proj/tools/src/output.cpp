#include "output.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace nnreach::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) {
  if (root_.empty()) throw std::invalid_argument("no output directory (use --out)");
  fs::create_directories(root_);
}

fs::path OutputDir::file(const std::string& name) {
  files_.push_back(name);
  return root_ / name;
}

void OutputDir::record(const fs::path& path) { files_.push_back(fs::relative(path, root_).generic_string()); }

void OutputDir::write_json(const std::string& name, const nlohmann::json& j) {
  std::ofstream out(file(name));
  if (!out) throw std::runtime_error("cannot write " + (root_ / name).string());
  out << dump_json(j);
}

void OutputDir::write_manifest(const std::string& command, std::uint64_t seed, const nlohmann::json& config) const {
  const fs::path path = root_ / "manifest.json";
  nlohmann::json manifest = nlohmann::json::object();
  if (fs::exists(path)) {
    std::ifstream in(path);
    manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) manifest = nlohmann::json::object();
  }
  std::vector<std::string> names = files_;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  nlohmann::json files = nlohmann::json::object();
  for (const auto& n : names) files[n] = sha256_file(root_ / n);

  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  manifest[command] = {{"seed", seed}, {"files", files}, {"config", config}, {"created_utc", stamp}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_json(manifest);
}

}  // namespace nnreach::cli
