#pragma once

#include <span>
#include <string>
#include <vector>

#include "asim/dataset.hpp"
#include "asim/embeddings.hpp"
#include "asim/evaluator.hpp"
#include "asim/model.hpp"
#include "asim/trainer.hpp"

namespace asim {

struct AblationRow {
  Variant variant = Variant::kFull;
  EvalReport report;
  std::size_t best_epoch = 0;
  double best_val_micro_f1 = 0.0;
};

/// Trains the full model and each requested variant with the same seeds and
/// training settings, then evaluates the best-validation checkpoint of each
/// on `test`. The full model always comes first; repeats are ignored.
std::vector<AblationRow> run_ablation(std::span<const EncodedPair> train_pairs, std::span<const EncodedPair> val_pairs,
                                      std::span<const EncodedPair> test_pairs, const AsimConfig& base,
                                      const Vocabulary& vocab, const EmbeddingTable& table, const TrainConfig& train_cfg,
                                      std::span<const Variant> variants, Task task, std::uint64_t init_seed);

/// Comparison table with macro precision, macro recall and Micro-F1 columns.
std::string ablation_table(std::span<const AblationRow> rows);

}  // namespace asim
