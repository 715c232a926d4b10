#include "verigen/registry.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "verigen/sha256.hpp"

namespace verigen {

namespace fs = std::filesystem;

Registry::Registry(std::string dir, std::size_t cache_capacity)
    : dir_(std::move(dir)), cache_capacity_(cache_capacity) {
  fs::create_directories(fs::path(dir_) / "objects");
}

std::string Registry::path_for(const std::string& address) const {
  return (fs::path(dir_) / "objects" / address.substr(0, 2) / address.substr(2, 2) /
          address)
      .string();
}

void Registry::cache_put(const std::string& address, const std::string& bytes) const {
  if (cache_capacity_ == 0) return;
  std::lock_guard lock(cache_mu_);
  auto it = cache_index_.find(address);
  if (it != cache_index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(address, bytes);
  cache_index_[address] = lru_.begin();
  while (lru_.size() > cache_capacity_) {
    cache_index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

std::string Registry::append(const std::string& bytes) {
  std::string address = Sha256::hex_digest(bytes);
  std::string path = path_for(address);
  if (fs::exists(path)) {
    cache_put(address, bytes);
    return address;  // dedup: identical content, same address
  }
  fs::create_directories(fs::path(path).parent_path());
  // Unique temp name per writer, atomic rename into place.
  static std::atomic<std::uint64_t> counter{0};
  std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." +
                    std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("storage-failure", "cannot write " + tmp);
    out << bytes;
    if (!out.good()) throw Error("storage-failure", "short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    // A concurrent writer may have won the race; content-addressing makes
    // that benign as long as the final file exists.
    fs::remove(tmp);
    if (!fs::exists(path)) {
      throw Error("storage-failure", "rename failed: " + ec.message());
    }
  }
  cache_put(address, bytes);
  return address;
}

std::optional<std::string> Registry::fetch(const std::string& address) const {
  {
    std::lock_guard lock(cache_mu_);
    auto it = cache_index_.find(address);
    if (it != cache_index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
  }
  std::ifstream in(path_for(address), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (Sha256::hex_digest(bytes) != address) {
    throw Error("storage-failure", "stored content does not match address " + address);
  }
  cache_put(address, bytes);
  return bytes;
}

bool Registry::contains(const std::string& address) const {
  {
    std::lock_guard lock(cache_mu_);
    if (cache_index_.count(address) != 0) return true;
  }
  return fs::exists(path_for(address));
}

void Registry::manifest_append(const ManifestEntry& entry) {
  std::ofstream out(fs::path(dir_) / "manifest.log", std::ios::app | std::ios::binary);
  if (!out) throw Error("storage-failure", "cannot open manifest");
  out << entry.artifact_address << ' ' << entry.bundle_address << ' '
      << entry.version_tag << '\n';
}

std::vector<ManifestEntry> Registry::manifest() const {
  std::vector<ManifestEntry> out;
  std::ifstream in(fs::path(dir_) / "manifest.log", std::ios::binary);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream parts(line);
    ManifestEntry e;
    parts >> e.artifact_address >> e.bundle_address >> e.version_tag;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> Registry::list_addresses() const {
  std::vector<std::string> out;
  fs::path objects = fs::path(dir_) / "objects";
  if (!fs::exists(objects)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(objects)) {
    if (entry.is_regular_file()) {
      std::string name = entry.path().filename().string();
      if (name.size() == 64) out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Registry::cache_size() const {
  std::lock_guard lock(cache_mu_);
  return lru_.size();
}

void Registry::drop_cache() {
  std::lock_guard lock(cache_mu_);
  lru_.clear();
  cache_index_.clear();
}

}  // namespace verigen
