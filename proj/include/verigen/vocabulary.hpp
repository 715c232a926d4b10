#pragma once

#include <string>
#include <vector>

#include "verigen/common.hpp"

namespace verigen {

// Token inventory for decoding. Ids are dense 0..n-1; exactly one entry is
// the EOS control token (its byte content is empty and never folded).
//
// File format: one token per line with escaped bytes (see escape_bytes);
// the line "%eos" declares the EOS token at that position. '#' lines and
// blank lines are ignored.
class Vocabulary {
public:
  static Vocabulary from_tokens(std::vector<std::string> tokens, int eos_index);
  static Vocabulary parse_file(const std::string& text);
  static Vocabulary load(const std::string& path);

  int size() const { return int(tokens_.size()); }
  int eos_index() const { return eos_index_; }
  bool is_eos(int id) const { return id == eos_index_; }
  const std::string& bytes(int id) const { return tokens_[std::size_t(id)]; }

  std::string serialize() const;

private:
  std::vector<std::string> tokens_;
  int eos_index_ = -1;
};

}  // namespace verigen
