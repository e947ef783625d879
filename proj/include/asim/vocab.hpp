#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace asim {

inline constexpr int kPadId = 0;
inline constexpr int kOovId = 1;
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kOovToken = "<oov>";

/// Token ↔ index map with reserved pad (0) and OOV (1) entries.
class Vocabulary {
 public:
  /// Only the two reserved entries.
  Vocabulary();

  /// Reserved entries followed by `tokens` in order. Throws DataError on
  /// duplicates or reserved names.
  static Vocabulary from_tokens(std::span<const std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  int id(std::string_view token) const;  // kOovId when unknown
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(std::span<const std::string> tokens) const;

  /// FNV-1a over the token list; identifies the vocabulary in checkpoints.
  std::uint64_t hash() const;

  /// One token per line in index order, reserved entries included.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  void push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Frequency-thresholded vocabulary: tokens with count ≥ min_count sorted by
/// descending count, then lexicographically. Throws DataError when the
/// corpus has no tokens, ConfigError when min_count < 1.
Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t min_count);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace asim
