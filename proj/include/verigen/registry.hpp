#pragma once

#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "verigen/common.hpp"

namespace verigen {

struct ManifestEntry {
  std::string artifact_address;
  std::string bundle_address;
  std::string version_tag;
};

// Content-addressed append-only store: one file per address under a
// two-level hex fan-out, a line-delimited manifest chaining version-tagged
// bundles per artifact, and a bounded in-memory LRU tier in front of disk.
// Writes are temp-then-rename; appends are atomic under concurrent writers.
class Registry {
public:
  explicit Registry(std::string dir, std::size_t cache_capacity = 64);

  // Persists `bytes`; returns the address (hex SHA-256). Duplicate content
  // returns the existing address without touching disk.
  std::string append(const std::string& bytes);

  std::optional<std::string> fetch(const std::string& address) const;
  bool contains(const std::string& address) const;

  void manifest_append(const ManifestEntry& entry);
  std::vector<ManifestEntry> manifest() const;

  // Addresses currently on disk (sorted).
  std::vector<std::string> list_addresses() const;

  const std::string& dir() const { return dir_; }
  std::size_t cache_size() const;
  void drop_cache();  // test hook: force reads through the durable tier

private:
  std::string path_for(const std::string& address) const;
  void cache_put(const std::string& address, const std::string& bytes) const;

  std::string dir_;
  std::size_t cache_capacity_;
  mutable std::mutex cache_mu_;
  mutable std::list<std::pair<std::string, std::string>> lru_;  // front = hottest
  mutable std::unordered_map<std::string,
                             std::list<std::pair<std::string, std::string>>::iterator>
      cache_index_;
};

}  // namespace verigen
