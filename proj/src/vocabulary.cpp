#include "verigen/vocabulary.hpp"

#include <fstream>
#include <sstream>

namespace verigen {

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens,
                                   int eos_index) {
  if (eos_index < 0 || eos_index >= int(tokens.size())) {
    throw Error("vocabulary-invalid", "eos index out of range");
  }
  for (int i = 0; i < int(tokens.size()); ++i) {
    if (i != eos_index && tokens[std::size_t(i)].empty()) {
      throw Error("vocabulary-invalid",
                  "token " + std::to_string(i) + " is empty");
    }
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.tokens_[std::size_t(eos_index)].clear();
  v.eos_index_ = eos_index;
  return v;
}

Vocabulary Vocabulary::parse_file(const std::string& text) {
  std::vector<std::string> tokens;
  int eos = -1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "%eos") {
      if (eos >= 0) throw Error("vocabulary-invalid", "duplicate %eos line");
      eos = int(tokens.size());
      tokens.emplace_back();
      continue;
    }
    tokens.push_back(unescape_bytes(line));
  }
  if (eos < 0) throw Error("vocabulary-invalid", "no %eos line");
  return from_tokens(std::move(tokens), eos);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open vocabulary file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_file(buf.str());
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (int i = 0; i < size(); ++i) {
    if (i == eos_index_) {
      out += "%eos\n";
    } else {
      out += escape_bytes(tokens_[std::size_t(i)]);
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace verigen
