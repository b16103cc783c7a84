#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace ckd {

inline constexpr std::string_view kManifestFile = "manifest.json";

// In-memory result files keyed by relative path, plus run metadata. The
// manifest lists every file with its digest and holds the full config.
class ResultsBundle {
 public:
  void add(std::string path, std::string contents);
  void set_meta(std::string key, nlohmann::json value);

  [[nodiscard]] bool contains(const std::string& path) const { return files_.contains(path); }
  [[nodiscard]] const std::string& file(const std::string& path) const;
  [[nodiscard]] const std::map<std::string, std::string>& files() const { return files_; }
  [[nodiscard]] nlohmann::json manifest() const;

  // Writes every file and the manifest under `dir`.
  void write(const std::filesystem::path& dir) const;
  static ResultsBundle read(const std::filesystem::path& dir);

 private:
  std::map<std::string, std::string> files_;
  nlohmann::json meta_ = nlohmann::json::object();
};

// Checks every manifest entry against the files on disk; returns the paths
// whose digest differs or that are missing.
std::vector<std::string> verify_bundle(const std::filesystem::path& dir);

}  // namespace ckd
