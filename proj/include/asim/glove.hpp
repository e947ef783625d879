#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asim/embeddings.hpp"
#include "asim/vocab.hpp"

namespace asim {

/// Distance-weighted co-occurrence counts keyed by (row word, context word).
struct CooccurrenceCounts {
  std::map<std::pair<int, int>, double> entries;
  std::size_t window = 0;
  bool symmetric = true;
  std::size_t vocab_size = 0;

  double count(int i, int j) const;
  bool empty() const { return entries.empty(); }
};

/// Adds 1/d to (i,j) and (j,i) for every pair of in-vocabulary tokens at
/// distance d ≤ window inside each sequence. Reserved ids are skipped.
CooccurrenceCounts count_cooccurrence(std::span<const std::vector<std::string>> corpus, const Vocabulary& vocab,
                                      std::size_t window);

void save_cooccurrence(const std::filesystem::path& path, const CooccurrenceCounts& counts);
CooccurrenceCounts load_cooccurrence(const std::filesystem::path& path);

struct GloveOptions {
  std::size_t dim = 300;
  std::size_t epochs = 25;
  double learning_rate = 0.05;
  double x_max = 100.0;
  double alpha = 0.75;
  std::uint64_t seed = 1;
};

/// Word, context and bias parameters of a GloVe model.
struct GloveModel {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
  std::vector<double> w, w_ctx;    // vocab_size × dim
  std::vector<double> b, b_ctx;    // vocab_size

  /// Output vectors w + w̃ as an embedding table (pad zeros, OOV policy row).
  EmbeddingTable to_table() const;
};

/// f(x) = min(1, (x/x_max)^alpha)
double glove_weight(double x, double x_max, double alpha);

/// Σ f(X_ij)(w_iᵀw̃_j + b_i + b̃_j − log X_ij)² over the stored entries.
double glove_objective(const CooccurrenceCounts& counts, const GloveModel& model, double x_max, double alpha);

GloveModel init_glove(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

struct GloveResult {
  GloveModel model;
  /// Objective before training (index 0) and after each epoch.
  std::vector<double> loss_history;
};

/// AdaGrad over the non-zero entries in a seeded shuffled order. Throws
/// DataError on empty counts and DivergenceError when the loss stops being
/// finite.
GloveResult train_glove(const CooccurrenceCounts& counts, const GloveOptions& options);

}  // namespace asim
