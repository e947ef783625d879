#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asim/vocab.hpp"

namespace asim {

/// Four-way relatedness (knowledge-unit dataset) or binary duplicate
/// detection (AskUbuntu).
enum class Task { kFourClass, kBinary };

std::string_view task_name(Task task);  // "ku4" / "binary"
Task parse_task(std::string_view name);
std::size_t num_classes(Task task);
/// Label strings in class-index order.
std::span<const std::string_view> label_names(Task task);
/// Class index of `label`, or -1 when it is not in the task's label set.
int label_index(Task task, std::string_view label);

struct RawRecord {
  std::string pair_id;
  std::string x_id, x_title, x_body, x_answers;
  std::string y_id, y_title, y_body, y_answers;
  int label = 0;  // index into label_names(task)
};

/// Column order of the knowledge-unit TSV.
inline constexpr std::array<std::string_view, 10> kKuColumns = {
    "pair_id", "x_id", "x_title", "x_body", "x_answers", "y_id", "y_title", "y_body", "y_answers", "label"};
/// Column order of the AskUbuntu TSV.
inline constexpr std::array<std::string_view, 6> kAskUbuntuColumns = {"pair_id", "x_title", "x_body",
                                                                      "y_title", "y_body",  "label"};

/// Parses the knowledge-unit TSV. A header row is optional. Throws ParseError
/// with the 1-based line number on unknown labels, wrong column counts or
/// repeated pair ids. An empty file yields no records and a warning.
std::vector<RawRecord> parse_ku_dataset(const std::filesystem::path& path);
/// AskUbuntu pairs: title + body only, answers left empty, binary labels.
std::vector<RawRecord> parse_askubuntu(const std::filesystem::path& path);
std::vector<RawRecord> parse_dataset(const std::filesystem::path& path, Task task);

void write_ku_dataset(const std::filesystem::path& path, std::span<const RawRecord> records);
void write_askubuntu(const std::filesystem::path& path, std::span<const RawRecord> records);

/// Per-class record counts.
std::vector<std::size_t> label_histogram(std::span<const RawRecord> records, Task task);

/// `\t`, `\n`, `\r` and `\\` escapes used inside TSV fields.
std::string tsv_escape(std::string_view field);
std::string tsv_unescape(std::string_view field);
std::vector<std::string> split_tsv_line(std::string_view line);

inline constexpr std::size_t kDefaultMaxLen = 250;

/// Preprocessed question (+answers) text.
struct KnowledgeUnit {
  std::vector<int> token_ids;
  std::vector<std::string> tokens;
  /// Token offsets where the body and the answers start (clipped to length).
  std::size_t body_begin = 0;
  std::size_t answers_begin = 0;

  std::size_t size() const { return tokens.size(); }
};

/// Title, body and answer tokens of one unit before truncation.
std::vector<std::string> unit_tokens(std::string_view title, std::string_view body, std::string_view answers,
                                     std::size_t* body_begin = nullptr, std::size_t* answers_begin = nullptr);

/// clean → tokenize each part, concatenate title ⊕ body ⊕ answers, keep the
/// first `max_len` tokens. The literal answers "null" counts as empty.
/// Throws EmptyUnitError mentioning `context` when no token survives.
KnowledgeUnit assemble_ku(std::string_view title, std::string_view body, std::string_view answers,
                          const Vocabulary& vocab, std::size_t max_len = kDefaultMaxLen,
                          std::string_view context = {});

/// A tokenized record as stored in the preprocessing cache.
struct TokenizedPair {
  std::string pair_id;
  std::vector<std::string> x_tokens;
  std::vector<std::string> y_tokens;
  int label = 0;
};

/// Tokenizes both sides of each record (truncating to max_len).
std::vector<TokenizedPair> tokenize_records(std::span<const RawRecord> records, std::size_t max_len);

/// Cache file: a `#asim-cache` header naming the task, then one
/// `pair_id \t label \t x tokens \t y tokens` row per pair.
void write_cache(const std::filesystem::path& path, Task task, std::span<const TokenizedPair> pairs,
                 std::string_view provenance = {});
std::vector<TokenizedPair> read_cache(const std::filesystem::path& path, Task* task = nullptr);
bool is_cache_file(const std::filesystem::path& path);

/// Token-id sequences ready for the model.
struct EncodedPair {
  std::vector<int> x;
  std::vector<int> y;
  int label = 0;
};

std::vector<EncodedPair> encode_pairs(std::span<const TokenizedPair> pairs, const Vocabulary& vocab);

}  // namespace asim
