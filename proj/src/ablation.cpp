#include "asim/ablation.hpp"

#include <algorithm>
#include <cstdio>

namespace asim {

std::vector<AblationRow> run_ablation(std::span<const EncodedPair> train_pairs, std::span<const EncodedPair> val_pairs,
                                      std::span<const EncodedPair> test_pairs, const AsimConfig& base,
                                      const Vocabulary& vocab, const EmbeddingTable& table, const TrainConfig& train_cfg,
                                      std::span<const Variant> variants, Task task, std::uint64_t init_seed) {
  std::vector<Variant> order{Variant::kFull};
  for (Variant v : variants)
    if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);

  std::vector<AblationRow> rows;
  for (Variant v : order) {
    TrainConfig cfg = train_cfg;
    std::string key(variant_key(v));
    std::replace(key.begin(), key.end(), ',', '-');
    if (!cfg.checkpoint_dir.empty()) cfg.checkpoint_dir /= key;
    if (!cfg.log_path.empty()) cfg.log_path.replace_filename(key + "-" + cfg.log_path.filename().string());
    AsimModel model(apply_variant(base, v), vocab, table, init_seed);
    const TrainResult result = train(std::move(model), train_pairs, val_pairs, cfg);
    AblationRow row;
    row.variant = v;
    row.best_epoch = result.best_epoch;
    row.best_val_micro_f1 = result.best_val_micro_f1;
    row.report = evaluate(result.best_model(), test_pairs, task);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_table(std::span<const AblationRow> rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-20s %10s %10s %10s\n", "Model", "Precision", "Recall", "Micro-F1");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-20s %10.4f %10.4f %10.4f\n", std::string(variant_name(r.variant)).c_str(),
                  r.report.macro_precision, r.report.macro_recall, r.report.micro_f1);
    out += buf;
  }
  out += "Precision and Recall are macro averages over classes.\n";
  return out;
}

}  // namespace asim
