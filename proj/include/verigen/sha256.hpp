#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace verigen {

// Incremental SHA-256. Dependency-free; bit-exact with FIPS 180-4.
class Sha256 {
public:
  Sha256() { reset(); }

  void reset();
  void update(const void* data, std::size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }
  // Appends an 8-byte big-endian length prefix followed by the bytes.
  // Used wherever several variable-length parts feed one digest.
  void update_framed(std::string_view s);
  std::array<std::uint8_t, 32> finish();

  static std::string hex_digest(std::string_view data);

private:
  void process_block(const std::uint8_t* block);

  std::uint32_t state_[8];
  std::uint64_t total_len_;
  std::uint8_t buffer_[64];
  std::size_t buffer_len_;
};

}  // namespace verigen
