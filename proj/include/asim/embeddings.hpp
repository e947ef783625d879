#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "asim/vocab.hpp"

namespace asim {

/// |V|×dim word vectors aligned with a Vocabulary.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<double> vectors;  // row-major, vocab.size() rows
  bool trainable = false;

  std::size_t rows() const { return dim ? vectors.size() / dim : 0; }
  std::span<const double> row(std::size_t id) const { return {vectors.data() + id * dim, dim}; }
  std::span<double> row(std::size_t id) { return {vectors.data() + id * dim, dim}; }
};

inline constexpr std::uint64_t kOovSeed = 0x0a51'0001;

/// Shared vector given to out-of-vocabulary words: uniform(−0.05, 0.05)
/// from a fixed seed.
std::vector<double> oov_vector(std::size_t dim);

/// Table with every row set to the OOV vector except pad (zeros).
EmbeddingTable oov_table(const Vocabulary& vocab, std::size_t dim);
/// Independent uniform(−0.05, 0.05) row per word, pad zeros, OOV row the
/// shared OOV vector. Used when no pre-trained vectors are supplied.
EmbeddingTable random_table(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

struct EmbeddingLoad {
  EmbeddingTable table;
  double coverage = 0.0;  // fraction of non-reserved vocab words found
};

/// Reads GloVe text vectors (word followed by `dim` floats per line, no
/// header). Throws ParseError on a malformed line, ConfigError when the file
/// dimension differs from `dim`.
EmbeddingLoad load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim);

/// Writes every non-reserved vocabulary row with 6 decimal digits.
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, const Vocabulary& vocab);

/// Row for `token`; the OOV row for unknown words.
std::span<const double> lookup(const EmbeddingTable& table, const Vocabulary& vocab, std::string_view token);

/// Tokens closest to `query` by cosine similarity, excluding reserved rows.
std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingTable& table, const Vocabulary& vocab,
                                                              std::string_view query, std::size_t k);

}  // namespace asim
