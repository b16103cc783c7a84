#include "ckd/app/bundle.hpp"

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

void ResultsBundle::add(std::string path, std::string contents) {
  if (path.empty() || path == kManifestFile || std::filesystem::path(path).is_absolute() ||
      path.find("..") != std::string::npos)
    throw ValidationError("invalid bundle path " + path);
  files_[std::move(path)] = std::move(contents);
}

void ResultsBundle::set_meta(std::string key, json value) { meta_[std::move(key)] = std::move(value); }

const std::string& ResultsBundle::file(const std::string& path) const {
  const auto it = files_.find(path);
  if (it == files_.end()) throw ValidationError("bundle has no file " + path);
  return it->second;
}

json ResultsBundle::manifest() const {
  json entries = json::array();
  for (const auto& [path, contents] : files_)
    entries.push_back({{"path", path}, {"sha256", sha256_hex(contents)}, {"bytes", contents.size()}});
  json m{{"format", "ckdscreen-bundle"}, {"version", 1}, {"files", entries}};
  for (const auto& [k, v] : meta_.items()) m[k] = v;
  return m;
}

void ResultsBundle::write(const std::filesystem::path& dir) const {
  for (const auto& [path, contents] : files_) {
    const auto p = dir / path;
    std::filesystem::create_directories(p.parent_path());
    write_text_file(p, contents);
  }
  std::filesystem::create_directories(dir);
  write_text_file(dir / kManifestFile, manifest().dump(1) + "\n");
}

ResultsBundle ResultsBundle::read(const std::filesystem::path& dir) {
  const auto m = json::parse(read_text_file(dir / kManifestFile));
  if (m.value("format", "") != "ckdscreen-bundle") throw ValidationError(dir.string() + " is not a results bundle");
  ResultsBundle b;
  for (const auto& [k, v] : m.items())
    if (k != "files" && k != "format" && k != "version") b.meta_[k] = v;
  for (const auto& e : m.at("files")) {
    const auto path = e.at("path").get<std::string>();
    b.files_[path] = read_text_file(dir / path);
  }
  return b;
}

std::vector<std::string> verify_bundle(const std::filesystem::path& dir) {
  const auto m = json::parse(read_text_file(dir / kManifestFile));
  std::vector<std::string> bad;
  for (const auto& e : m.at("files")) {
    const auto path = e.at("path").get<std::string>();
    const auto p = dir / path;
    if (!std::filesystem::exists(p) || sha256_file(p) != e.at("sha256").get<std::string>()) bad.push_back(path);
  }
  return bad;
}

}  // namespace ckd
