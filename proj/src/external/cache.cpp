#include "ckd/external/cache.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>

#include <curl/curl.h>
#include <json.hpp>
#include <zlib.h>

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

namespace {

std::uint32_t le32(std::string_view s, std::size_t at) {
  if (at + 4 > s.size()) throw ValidationError("truncated zip archive");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + static_cast<std::size_t>(i)]);
  return v;
}

std::uint16_t le16(std::string_view s, std::size_t at) {
  if (at + 2 > s.size()) throw ValidationError("truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) | (static_cast<unsigned char>(s[at + 1]) << 8));
}

struct ZipEntry {
  std::string name;
  std::uint16_t method;
  std::uint32_t compressed;
  std::uint32_t size;
  std::uint32_t local_offset;
};

std::vector<ZipEntry> zip_directory(std::string_view a) {
  if (a.size() < 22) throw ValidationError("not a zip archive");
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = a.size() > 22 + 65535 ? a.size() - 22 - 65535 : 0;
  for (std::size_t p = a.size() - 22 + 1; p-- > lowest;) {
    if (le32(a, p) == 0x06054b50) {
      eocd = p;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw ValidationError("zip end-of-directory record not found");
  const auto count = le16(a, eocd + 10);
  std::size_t p = le32(a, eocd + 16);
  std::vector<ZipEntry> out;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (le32(a, p) != 0x02014b50) throw ValidationError("corrupt zip central directory");
    ZipEntry e;
    e.method = le16(a, p + 10);
    e.compressed = le32(a, p + 20);
    e.size = le32(a, p + 24);
    const auto name_len = le16(a, p + 28);
    const auto extra_len = le16(a, p + 30);
    const auto comment_len = le16(a, p + 32);
    e.local_offset = le32(a, p + 42);
    if (p + 46 + name_len > a.size()) throw ValidationError("truncated zip archive");
    e.name = std::string(a.substr(p + 46, name_len));
    out.push_back(std::move(e));
    p += 46 + name_len + extra_len + comment_len;
  }
  return out;
}

std::string zip_read(std::string_view a, const ZipEntry& e) {
  const std::size_t p = e.local_offset;
  if (le32(a, p) != 0x04034b50) throw ValidationError("corrupt zip local header for " + e.name);
  const std::size_t start = p + 30 + le16(a, p + 26) + le16(a, p + 28);
  if (start + e.compressed > a.size()) throw ValidationError("truncated zip member " + e.name);
  const auto data = a.substr(start, e.compressed);
  if (e.method == 0) return std::string(data);
  if (e.method != 8) throw ValidationError("unsupported zip compression method for " + e.name);
  std::string out(e.size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error("zlib initialisation failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != e.size) throw ValidationError("corrupt deflate data in " + e.name);
  return out;
}

bool name_matches(std::string_view entry, std::string_view name) {
  if (entry == name) return true;
  return entry.size() > name.size() && entry.ends_with(name) && entry[entry.size() - name.size() - 1] == '/';
}

}  // namespace

bool is_zip(std::string_view bytes) { return bytes.size() >= 4 && bytes.substr(0, 4) == std::string_view("PK\x03\x04", 4); }

std::vector<std::string> zip_members(std::string_view archive) {
  std::vector<std::string> out;
  for (const auto& e : zip_directory(archive)) out.push_back(e.name);
  return out;
}

std::string zip_extract(std::string_view archive, std::string_view name) {
  const auto dir = zip_directory(archive);
  for (const auto& e : dir)
    if (name_matches(e.name, name)) return zip_read(archive, e);
  for (const auto& e : dir) {
    if (!e.name.ends_with(".zip")) continue;
    const auto inner = zip_read(archive, e);
    for (const auto& ie : zip_directory(inner))
      if (name_matches(ie.name, name)) return zip_read(inner, ie);
  }
  throw ValidationError("archive has no member " + std::string(name));
}

namespace {

std::size_t collect(char* ptr, std::size_t size, std::size_t n, void* user) {
  static_cast<std::string*>(user)->append(ptr, size * n);
  return size * n;
}

}  // namespace

std::string http_get(const std::string& uri, long timeout_seconds) {
  static const bool init = curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK;
  if (!init) throw Error("libcurl initialisation failed");
  CURL* h = curl_easy_init();
  if (!h) throw Error("libcurl initialisation failed");
  std::string body;
  curl_easy_setopt(h, CURLOPT_URL, uri.c_str());
  curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(h, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(h, CURLOPT_TIMEOUT, timeout_seconds);
  curl_easy_setopt(h, CURLOPT_USERAGENT, "ckdscreen/1.0");
  curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, collect);
  curl_easy_setopt(h, CURLOPT_WRITEDATA, &body);
  const auto rc = curl_easy_perform(h);
  curl_easy_cleanup(h);
  if (rc != CURLE_OK) throw Error("download failed for " + uri + ": " + curl_easy_strerror(rc));
  return body;
}

DatasetCache::DatasetCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path DatasetCache::default_dir() {
  if (const char* env = std::getenv("CKD_CACHE_DIR"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "ckdscreen";
  return std::filesystem::temp_directory_path() / "ckdscreen-cache";
}

std::filesystem::path DatasetCache::path_for(const HarmonizationMap& map) const {
  return dir_ / (std::string(dataset_key(map.dataset)) + ".src");
}

namespace {

nlohmann::json read_index(const std::filesystem::path& dir) {
  const auto p = dir / "index.json";
  if (!std::filesystem::exists(p)) return nlohmann::json::object();
  return nlohmann::json::parse(read_text_file(p));
}

}  // namespace

std::string DatasetCache::digest(const HarmonizationMap& map) const {
  const auto idx = read_index(dir_);
  const auto key = std::string(dataset_key(map.dataset));
  if (!idx.contains(key)) return {};
  return idx.at(key).at("sha256").get<std::string>();
}

bool DatasetCache::contains(const HarmonizationMap& map) const {
  const auto p = path_for(map);
  if (!std::filesystem::exists(p)) return false;
  const auto recorded = digest(map);
  if (recorded.empty()) return false;
  const auto actual = sha256_file(p);
  if (actual != recorded) return false;
  return !map.sha256 || *map.sha256 == actual;
}

std::filesystem::path DatasetCache::store(const HarmonizationMap& map, std::string_view bytes) {
  const auto sha = sha256_hex(bytes);
  if (map.sha256 && *map.sha256 != sha)
    throw ValidationError(std::string(dataset_name(map.dataset)) + " source digest " + sha + " does not match pinned " +
                          *map.sha256);
  std::filesystem::create_directories(dir_);
  const auto p = path_for(map);
  write_text_file(p, bytes);
  auto idx = read_index(dir_);
  idx[std::string(dataset_key(map.dataset))] = {{"uri", map.source_uri}, {"sha256", sha}, {"file", p.filename().string()}};
  write_text_file(dir_ / "index.json", idx.dump(1) + "\n");
  return p;
}

std::filesystem::path DatasetCache::ensure(const HarmonizationMap& map, bool allow_network) {
  if (contains(map)) return path_for(map);
  if (!allow_network)
    throw ValidationError(std::string(dataset_name(map.dataset)) + " is not in the cache at " + dir_.string() +
                          " and network access is disabled");
  return store(map, http_get(map.source_uri));
}

std::filesystem::path DatasetCache::import(const HarmonizationMap& map, const std::filesystem::path& source) {
  return store(map, read_text_file(source));
}

RawTable load_source(const std::filesystem::path& cached, const HarmonizationMap& map) {
  auto bytes = read_text_file(cached);
  std::string name = map.archive_member;
  if (is_zip(bytes)) {
    if (name.empty()) throw ValidationError("archive source needs archive_member in the map");
    bytes = zip_extract(bytes, name);
  }
  const bool arff = std::string_view(name).ends_with(".arff") || bytes.find("@relation") != std::string::npos ||
                    bytes.find("@RELATION") != std::string::npos;
  return parse_source_table(bytes, arff, map);
}

}  // namespace ckd
