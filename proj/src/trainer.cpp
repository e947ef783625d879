#include "asim/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "asim/errors.hpp"
#include "asim/evaluator.hpp"
#include "asim/ops.hpp"

namespace asim {
namespace {

std::size_t true_length(const Mask& m) { return static_cast<std::size_t>(std::count(m.begin(), m.end(), true)); }

void pad_side(std::vector<const std::vector<int>*> seqs, std::vector<std::vector<int>>& ids, std::vector<Mask>& masks) {
  std::size_t longest = 0;
  for (const auto* s : seqs) longest = std::max(longest, s->size());
  for (const auto* s : seqs) {
    std::vector<int> row(longest, kPadId);
    std::copy(s->begin(), s->end(), row.begin());
    Mask mask(longest, false);
    std::fill_n(mask.begin(), s->size(), true);
    ids.push_back(std::move(row));
    masks.push_back(std::move(mask));
  }
}

void write_checkpoint(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined state
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
}

std::vector<Batch> make_batches(std::span<const EncodedPair> pairs, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  std::shuffle(order.begin(), order.end(), gen);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    std::vector<const std::vector<int>*> xs, ys;
    for (std::size_t i = start; i < end; ++i) {
      const auto& p = pairs[order[i]];
      xs.push_back(&p.x);
      ys.push_back(&p.y);
      b.labels.push_back(p.label);
    }
    pad_side(xs, b.x_ids, b.x_mask);
    pad_side(ys, b.y_ids, b.y_mask);
    batches.push_back(std::move(b));
  }
  return batches;
}

double accumulate_gradients(const AsimModel& model, const Batch& batch, std::uint64_t dropout_seed) {
  if (batch.size() == 0) throw DataError("empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    // Masks are prefix-true, so the unpadded prefix is the same sequence.
    const std::span<const int> x(batch.x_ids[i].data(), true_length(batch.x_mask[i]));
    const std::span<const int> y(batch.y_ids[i].data(), true_length(batch.y_mask[i]));
    const auto trace = model.forward(x, y, Mode::kTrain, mix_seed(dropout_seed, i));
    const Tensor loss = cross_entropy(trace.logits, static_cast<std::size_t>(batch.labels[i]));
    const double value = loss.item();
    if (!std::isfinite(value)) throw DivergenceError("non-finite loss on batch example " + std::to_string(i));
    total += value;
    scale(loss, inv).backward();
  }
  return total * inv;
}

double train_step(AsimModel& model, const Batch& batch, AdamState& adam, const TrainConfig& cfg,
                  std::uint64_t dropout_seed) {
  model.zero_grad();
  const double loss = accumulate_gradients(model, batch, dropout_seed);
  auto params = model.parameters();
  if (cfg.clip_norm > 0.0) clip_grad_norm(params, cfg.clip_norm);
  adam_step(params, adam);
  return loss;
}

TrainResult train(AsimModel model, std::span<const EncodedPair> train_pairs, std::span<const EncodedPair> val_pairs,
                  const TrainConfig& cfg, const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  if (train_pairs.empty()) throw DataError("training split is empty");
  if (val_pairs.empty()) throw DataError("validation split is empty");
  const bool save = !cfg.checkpoint_dir.empty();
  if (save) std::filesystem::create_directories(cfg.checkpoint_dir);

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    if (cfg.log_path.has_parent_path()) std::filesystem::create_directories(cfg.log_path.parent_path());
    log.open(cfg.log_path);
    if (!log) throw Error("cannot write epoch log " + cfg.log_path.string());
    if (!cfg.provenance.empty()) log << "# " << cfg.provenance << '\n';
    log << "epoch,train_loss,val_micro_f1,seconds\n" << std::flush;
  }

  TrainResult result;
  result.last_checkpoint = model.serialize();
  result.best_checkpoint = result.last_checkpoint;
  result.best_val_micro_f1 = std::numeric_limits<double>::quiet_NaN();
  if (save) {
    write_checkpoint(cfg.checkpoint_dir / "last.ckpt", result.last_checkpoint);
    write_checkpoint(cfg.checkpoint_dir / "best.ckpt", result.best_checkpoint);
  }

  auto params = model.parameters();
  AdamState adam = AdamState::for_params(params, cfg.learning_rate);
  const auto task = model.config().num_classes == 2 ? Task::kBinary : Task::kFourClass;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t epoch_seed = mix_seed(cfg.seed, epoch);
    const auto batches = make_batches(train_pairs, cfg.batch_size, epoch_seed);
    double loss_sum = 0.0;
    try {
      for (std::size_t b = 0; b < batches.size(); ++b) {
        const double loss = train_step(model, batches[b], adam, cfg, mix_seed(epoch_seed, b + 1));
        loss_sum += loss * static_cast<double>(batches[b].size());
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " during epoch " + std::to_string(epoch) +
                            (save ? "; last good checkpoint kept at " + (cfg.checkpoint_dir / "last.ckpt").string()
                                  : std::string()));
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(train_pairs.size());
    entry.val_micro_f1 = std::numeric_limits<double>::quiet_NaN();
    result.last_checkpoint = model.serialize();
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      entry.val_micro_f1 = evaluate(model, val_pairs, task).micro_f1;
      if (std::isnan(result.best_val_micro_f1) || entry.val_micro_f1 > result.best_val_micro_f1) {
        result.best_val_micro_f1 = entry.val_micro_f1;
        result.best_epoch = epoch;
        result.best_checkpoint = result.last_checkpoint;
        if (save) write_checkpoint(cfg.checkpoint_dir / "best.ckpt", result.best_checkpoint);
      }
    }
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (save) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%03zu.ckpt", epoch);
      write_checkpoint(cfg.checkpoint_dir / name, result.last_checkpoint);
      write_checkpoint(cfg.checkpoint_dir / "last.ckpt", result.last_checkpoint);
    }
    if (log.is_open()) {
      log << entry.epoch << ',' << format_double(entry.train_loss) << ',' << format_double(entry.val_micro_f1) << ','
          << format_double(entry.seconds) << '\n'
          << std::flush;
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return result;
}

std::vector<EpochLog> read_epoch_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open epoch log " + path.string());
  std::vector<EpochLog> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("epoch,", 0) == 0) continue;
    EpochLog e;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1)
      cols.push_back(line.substr(start, comma - start));
    cols.push_back(line.substr(start));
    if (cols.size() != 4) throw ParseError(path.string(), line_no, "expected 4 columns");
    try {
      e.epoch = std::stoul(cols[0]);
      e.train_loss = std::stod(cols[1]);
      e.val_micro_f1 = cols[2].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cols[2]);
      e.seconds = std::stod(cols[3]);
    } catch (const std::logic_error&) {
      throw ParseError(path.string(), line_no, "malformed number");
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace asim
