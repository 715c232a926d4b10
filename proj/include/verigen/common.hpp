#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace verigen {

// Library-wide error type. `code` is a stable machine-readable identifier
// (e.g. "duplicate-id", "unsupported-operator"); `what()` carries the
// human-readable detail.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

private:
  std::string code_;
};

std::string to_hex(std::string_view bytes);

// Escapes arbitrary bytes for line-oriented text files: '\\', '\n', '\t',
// '\r' and \xHH for other non-printables. Inverse of unescape_bytes.
std::string escape_bytes(std::string_view bytes);
std::string unescape_bytes(std::string_view text);

// Process-wide monotone logical clock used to timestamp traces. Wall time
// can tie or regress; ordering checks use this counter.
std::uint64_t next_logical_time();
std::uint64_t wall_clock_ns();

}  // namespace verigen
