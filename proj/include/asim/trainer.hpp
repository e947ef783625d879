#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "asim/dataset.hpp"
#include "asim/model.hpp"
#include "asim/optim.hpp"

namespace asim {

struct TrainConfig {
  double learning_rate = 0.0012;
  std::size_t batch_size = 128;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  /// Per-epoch, best and last checkpoints go here when non-empty.
  std::filesystem::path checkpoint_dir;
  /// Validation runs every `eval_every` epochs and always after the last one.
  std::size_t eval_every = 1;
  /// CSV epoch log; skipped when empty.
  std::filesystem::path log_path;
  /// Gradient norm clipping threshold; 0 disables clipping.
  double clip_norm = 0.0;
  /// Comment line written at the top of the epoch log.
  std::string provenance;

  void validate() const;
};

/// Padded id matrices of one mini-batch.
struct Batch {
  std::vector<std::vector<int>> x_ids;  // B rows of length n_max
  std::vector<std::vector<int>> y_ids;  // B rows of length m_max
  std::vector<Mask> x_mask;
  std::vector<Mask> y_mask;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Seeded shuffle, then consecutive slices of `batch_size`; the final partial
/// batch is kept. Rows are padded with kPadId to the batch maximum.
std::vector<Batch> make_batches(std::span<const EncodedPair> pairs, std::size_t batch_size, std::uint64_t seed);

/// Mean cross-entropy of a batch in training mode. Gradients of
/// loss/B accumulate onto the model parameters; nothing is updated.
double accumulate_gradients(const AsimModel& model, const Batch& batch, std::uint64_t dropout_seed);

/// zero_grad, accumulate_gradients, optional clipping, one Adam step.
/// Returns the batch loss. Throws DivergenceError on a non-finite loss or
/// gradient before any parameter changes.
double train_step(AsimModel& model, const Batch& batch, AdamState& adam, const TrainConfig& cfg,
                  std::uint64_t dropout_seed);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_micro_f1 = 0.0;  // NaN when validation was skipped
  double seconds = 0.0;
};

struct TrainResult {
  std::string best_checkpoint;  // serialized model bytes
  std::string last_checkpoint;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;   // 0: the initialization
  double best_val_micro_f1 = 0.0;  // NaN when nothing was validated

  AsimModel best_model() const { return AsimModel::deserialize(best_checkpoint); }
  AsimModel last_model() const { return AsimModel::deserialize(last_checkpoint); }
};

/// Trains `model` and tracks the checkpoint with the best validation
/// Micro-F1. On divergence the last good checkpoint is kept on disk and a
/// DivergenceError propagates.
TrainResult train(AsimModel model, std::span<const EncodedPair> train_pairs, std::span<const EncodedPair> val_pairs,
                  const TrainConfig& cfg, const std::function<void(const EpochLog&)>& on_epoch = {});

/// Reads an epoch log written by `train`.
std::vector<EpochLog> read_epoch_log(const std::filesystem::path& path);

/// Stateless 64-bit mixing used to derive per-epoch and per-example seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace asim
