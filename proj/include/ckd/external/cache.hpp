#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ckd/cohort/raw_table.hpp"
#include "ckd/external/harmonize.hpp"

namespace ckd {

// Names of the members of a zip archive, in directory order.
std::vector<std::string> zip_members(std::string_view archive);
// Contents of the member whose path equals `name` or ends in "/name".
// Archives nested one level deep are searched when no direct match exists.
std::string zip_extract(std::string_view archive, std::string_view name);
bool is_zip(std::string_view bytes);

// HTTP(S) GET; failures raise Error with the URI.
std::string http_get(const std::string& uri, long timeout_seconds = 60);

// Local store of downloaded sources keyed by dataset, with a digest index.
// A cached file is only used when its digest still matches the index and,
// when the map pins one, the map's digest.
class DatasetCache {
 public:
  explicit DatasetCache(std::filesystem::path dir);
  // CKD_CACHE_DIR, else $HOME/.cache/ckdscreen.
  static std::filesystem::path default_dir();

  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }
  [[nodiscard]] bool contains(const HarmonizationMap& map) const;
  // Cached copy, downloading it first when allowed.
  std::filesystem::path ensure(const HarmonizationMap& map, bool allow_network);
  // Registers a file obtained out of band.
  std::filesystem::path import(const HarmonizationMap& map, const std::filesystem::path& source);
  [[nodiscard]] std::string digest(const HarmonizationMap& map) const;

 private:
  std::filesystem::path store(const HarmonizationMap& map, std::string_view bytes);
  [[nodiscard]] std::filesystem::path path_for(const HarmonizationMap& map) const;

  std::filesystem::path dir_;
};

// Reads the dataset's table from a cached source, unpacking archives.
RawTable load_source(const std::filesystem::path& cached, const HarmonizationMap& map);

}  // namespace ckd
