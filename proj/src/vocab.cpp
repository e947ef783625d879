#include "asim/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "asim/errors.hpp"

namespace asim {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Vocabulary::Vocabulary() {
  push(std::string(kPadToken));
  push(std::string(kOovToken));
}

void Vocabulary::push(std::string token) {
  if (index_.contains(token)) throw DataError("duplicate vocabulary token '" + token + "'");
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens) {
  Vocabulary v;
  for (const auto& t : tokens) v.push(t);
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOovId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary file " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < 2 || lines[0] != kPadToken || lines[1] != kOovToken) {
    throw ParseError(path.string(), 1, "vocabulary must start with " + std::string(kPadToken) + " and " +
                                           std::string(kOovToken));
  }
  Vocabulary v;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) throw ParseError(path.string(), i + 1, "empty token");
    if (v.contains(lines[i])) throw ParseError(path.string(), i + 1, "duplicate token '" + lines[i] + "'");
    v.push(lines[i]);
  }
  return v;
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& seq : corpus) {
    for (const auto& t : seq) {
      if (t == kPadToken || t == kOovToken) continue;
      ++counts[t];
      ++total;
    }
  }
  if (total == 0) throw DataError("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_count) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return Vocabulary::from_tokens(tokens);
}

}  // namespace asim
