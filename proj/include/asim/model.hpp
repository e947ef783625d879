#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "asim/embeddings.hpp"
#include "asim/lstm.hpp"
#include "asim/optim.hpp"
#include "asim/tensor.hpp"
#include "asim/vocab.hpp"

namespace asim {

/// Network hyperparameters and ablation switches.
struct AsimConfig {
  std::size_t embed_dim = 300;
  std::size_t hidden = 200;
  std::size_t num_classes = 4;
  std::size_t max_len = 250;
  double dropout = 0.2;
  std::vector<std::size_t> prediction_hidden_dims = {200};
  bool use_attention = true;
  bool use_fusion = true;
  bool use_shortcuts = true;
  bool train_embeddings = false;

  /// Width of the contextual vectors that meet in the attention layer.
  std::size_t k() const { return 2 * hidden; }
  void validate() const;

  /// Flat `key=value` lines, sorted by key.
  std::string to_text() const;
  static AsimConfig from_text(std::string_view text);
  bool operator==(const AsimConfig&) const = default;
};

/// Named ablation presets of the comparison table.
enum class Variant { kFull, kNoFusion, kNoShortcuts, kNoFusionNoShortcuts, kNoAttention };
std::string_view variant_name(Variant v);   // "ASIM", "ASIM (-FL)", ...
std::string_view variant_key(Variant v);    // "full", "fl", "sc", "fl,sc", "attn,fl,sc"
Variant parse_variant(std::string_view key);
AsimConfig apply_variant(AsimConfig cfg, Variant v);
std::span<const Variant> all_variants();

/// Single affine map y = xW + b with W in×out.
struct Affine {
  Tensor weight;
  Tensor bias;

  static Affine init(std::size_t in, std::size_t out, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const;
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

struct AsimParams {
  BiLstmParams encoder;
  Affine attention_input;   // [x_emb ; X] → k, shortcut wiring only
  Affine fuse_concat;       // F1
  Affine fuse_difference;   // F2
  Affine fuse_product;      // F3
  Affine fuse_merge;        // F
  Affine concat_projection; // replaces the fusion layer when it is ablated
  BiLstmParams composer;
  std::vector<Affine> prediction_hidden;
  Affine prediction_output;
};

/// Per-call dropout state; every application draws a fresh sub-seed.
class DropoutContext {
 public:
  DropoutContext(double rate, bool training, std::uint64_t seed) : rate_(rate), training_(training), rng_(seed) {}
  Tensor operator()(const Tensor& v);
  bool training() const { return training_; }

 private:
  double rate_;
  bool training_;
  std::mt19937_64 rng_;
};

enum class Mode { kTrain, kEval };

/// One side of a pair: token ids with their validity mask (padding false).
struct SequenceRef {
  std::span<const int> ids;
  const Mask& mask;
};

struct AttentionResult {
  Tensor x_hat;      // n×k
  Tensor y_hat;      // m×k
  Tensor scores;     // E, n×m
  Tensor weights_x;  // e_X, n×m (rows softmaxed over y)
  Tensor weights_y;  // e_Y, m×n (rows softmaxed over x)
};

struct ForwardTrace {
  Tensor scores;     // E; undefined when attention is disabled
  Tensor weights_x;  // e_X; undefined when attention is disabled
  Tensor weights_y;
  Tensor pooled_x;   // V_max^X
  Tensor pooled_y;
  Tensor prediction_input;  // [Vx ; Vy ; Vx − Vy ; Vx ∘ Vy]
  Tensor logits;
  std::vector<double> probs;
};

// Layer functions. They are exposed for testing and reuse the model's
// parameter structures.

/// Rows of the embedding table for each id. Throws DataError for ids outside
/// the table.
Tensor embed_sequence(std::span<const int> ids, const Tensor& table);
/// Contextual encoding [→h_i ; ←h_i].
Tensor input_encode(const Tensor& x_emb, const Mask& mask, const BiLstmParams& encoder, DropoutContext& dropout);
/// E = X·Yᵀ, row/column softmax scaled by 1/√k, aligned representations.
AttentionResult inter_attention(const Tensor& x, const Tensor& y, const Mask& mask_x, const Mask& mask_y);
/// Fusion layer, or the concatenation projection when `use_fusion` is off.
Tensor fuse(const Tensor& x, const Tensor& x_hat, const AsimParams& params, const AsimConfig& cfg,
            DropoutContext& dropout);
/// Matching composition BiLSTM; the input gains the word embeddings when
/// shortcuts are on.
Tensor compose(const Tensor& x_tilde, const Tensor& x_emb, const Mask& mask, const AsimParams& params,
               const AsimConfig& cfg, DropoutContext& dropout);
/// Max-pooling, interaction features, feed-forward classifier.
ForwardTrace predict(const Tensor& vx, const Tensor& vy, const Mask& mask_x, const Mask& mask_y,
                     const AsimParams& params, DropoutContext& dropout);

/// ASIM network: configuration, vocabulary, embeddings and parameters.
class AsimModel {
 public:
  AsimModel(AsimConfig cfg, Vocabulary vocab, EmbeddingTable table, std::uint64_t init_seed);

  /// Deep copy; parameters of the copy are independent leaves.
  AsimModel clone() const;

  const AsimConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  const Tensor& embedding() const { return embedding_; }
  AsimParams& params() { return params_; }
  const AsimParams& params() const { return params_; }

  /// Every trainable tensor with a stable dotted name. The embedding table is
  /// listed only when embeddings are trainable.
  std::vector<NamedTensor> parameters() const;
  /// Every stored tensor including a frozen embedding table.
  std::vector<NamedTensor> state() const;
  void zero_grad();

  ForwardTrace forward(SequenceRef x, SequenceRef y, Mode mode, std::uint64_t seed = 0) const;
  /// Convenience overload for unpadded sequences.
  ForwardTrace forward(std::span<const int> x, std::span<const int> y, Mode mode = Mode::kEval,
                       std::uint64_t seed = 0) const;

  void save(const std::filesystem::path& path) const;
  static AsimModel load(const std::filesystem::path& path);
  /// Same bytes as `save` would write.
  std::string serialize() const;
  static AsimModel deserialize(std::string_view bytes, const std::string& source = "<memory>");

 private:
  AsimConfig cfg_;
  Vocabulary vocab_;
  Tensor embedding_;
  AsimParams params_;
};

inline constexpr std::string_view kToolVersion = "asim 0.1.0";

}  // namespace asim
