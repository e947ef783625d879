#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asim/dataset.hpp"

namespace asim {

/// Balanced synthetic pairs with the knowledge-unit schema. Duplicates share
/// most words, direct pairs about half, indirect pairs come from a
/// neighbouring topic and isolated pairs from an unrelated one; each class
/// also mixes a few class-specific marker words into the second body.
/// `binary` folds the four classes onto duplicate / non-duplicate.
std::vector<RawRecord> synthetic_pairs(std::size_t n_pairs, std::uint64_t seed, bool binary = false);

/// Sentences of topic words totalling about `n_tokens` tokens.
std::vector<std::vector<std::string>> synthetic_corpus(std::size_t n_tokens, std::uint64_t seed);

/// The fixed pseudo-word pool the generators draw from.
const std::vector<std::string>& synthetic_words();

}  // namespace asim
