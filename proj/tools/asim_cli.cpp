// asim: preprocessing, training, evaluation, prediction, attention export
// and embedding tools for knowledge-unit relatedness models.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "asim/ablation.hpp"
#include "asim/attention_export.hpp"
#include "asim/dataset.hpp"
#include "asim/embeddings.hpp"
#include "asim/errors.hpp"
#include "asim/evaluator.hpp"
#include "asim/glove.hpp"
#include "asim/model.hpp"
#include "asim/synth.hpp"
#include "asim/text.hpp"
#include "asim/trainer.hpp"
#include "asim/vocab.hpp"

namespace fs = std::filesystem;
using namespace asim;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string provenance(std::string_view config_text, std::uint64_t seed) {
  return std::string(kToolVersion) + " config=" + hex64(fnv1a64(config_text)) + " seed=" + std::to_string(seed);
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void prepare_out_dir(const fs::path& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

/// Cache files are used as they are; raw TSV files are parsed and tokenized.
std::vector<TokenizedPair> load_pairs(const fs::path& path, Task task, std::size_t max_len) {
  if (!fs::exists(path)) throw Error("no such file: " + path.string());
  std::vector<TokenizedPair> pairs;
  if (is_cache_file(path)) {
    Task cached = task;
    pairs = read_cache(path, &cached);
    if (cached != task) {
      throw ConfigError(path.string() + " was preprocessed for task '" + std::string(task_name(cached)) +
                        "', not '" + std::string(task_name(task)) + "'");
    }
    for (auto& p : pairs) {
      if (p.x_tokens.size() > max_len) p.x_tokens.resize(max_len);
      if (p.y_tokens.size() > max_len) p.y_tokens.resize(max_len);
    }
  } else {
    const auto records = parse_dataset(path, task);
    pairs = tokenize_records(records, max_len);
  }
  return pairs;
}

std::vector<std::vector<std::string>> pair_corpus(std::span<const TokenizedPair> pairs) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& p : pairs) {
    corpus.push_back(p.x_tokens);
    corpus.push_back(p.y_tokens);
  }
  return corpus;
}

/// Cache files contribute their token rows; any other file one document per
/// line, cleaned and tokenized.
std::vector<std::vector<std::string>> read_corpus(const std::vector<fs::path>& paths) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& path : paths) {
    if (!fs::exists(path)) throw Error("no such file: " + path.string());
    if (is_cache_file(path)) {
      const auto pairs = read_cache(path);
      for (auto& seq : pair_corpus(pairs)) corpus.push_back(std::move(seq));
      continue;
    }
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      auto tokens = tokenize(clean_text(line));
      if (!tokens.empty()) corpus.push_back(std::move(tokens));
    }
  }
  return corpus;
}

std::size_t embedding_file_dim(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::size_t n = 0;
    for (std::string v; ls >> v;) ++n;
    return n;
  }
  throw DataError("embeddings file " + path.string() + " is empty");
}

struct ModelOptions {
  std::size_t hidden = 200;
  std::size_t embed_dim = 0;  // 0: from the embeddings file, else 300
  std::size_t max_len = kDefaultMaxLen;
  double dropout = 0.2;
  std::vector<std::size_t> prediction_hidden = {200};
  std::string ablate;
  bool train_embeddings = false;
  std::string task = "ku4";
  std::string embeddings;
};

struct TrainOptions {
  double lr = 0.0012;
  std::size_t batch_size = 128;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;
  std::size_t eval_every = 1;
};

void add_model_options(CLI::App* app, ModelOptions& m) {
  app->add_option("--hidden", m.hidden, "BiLSTM hidden size per direction")->capture_default_str();
  app->add_option("--embed-dim", m.embed_dim, "Embedding dimension (default: from --embeddings, else 300)");
  app->add_option("--max-len", m.max_len, "Maximum tokens per knowledge unit")->capture_default_str();
  app->add_option("--dropout", m.dropout, "Dropout rate")->capture_default_str();
  app->add_option("--prediction-hidden", m.prediction_hidden, "Hidden widths of the prediction network")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--ablate", m.ablate, "Components to remove: any of attn,fl,sc (comma separated)");
  app->add_flag("--train-embeddings", m.train_embeddings, "Fine-tune the embedding table");
  app->add_option("--task", m.task, "ku4 or binary")->check(CLI::IsMember({"ku4", "binary"}))->capture_default_str();
  app->add_option("--embeddings", m.embeddings, "GloVe-format text embeddings");
}

void add_train_options(CLI::App* app, TrainOptions& t) {
  app->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str();
  app->add_option("--batch-size", t.batch_size, "Mini-batch size")->capture_default_str();
  app->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  app->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  app->add_option("--clip-norm", t.clip_norm, "Gradient norm clipping threshold (0 = off)")->capture_default_str();
  app->add_option("--eval-every", t.eval_every, "Validate every N epochs")->capture_default_str();
}

AsimConfig model_config(const ModelOptions& m) {
  AsimConfig cfg;
  cfg.hidden = m.hidden;
  cfg.max_len = m.max_len;
  cfg.dropout = m.dropout;
  cfg.prediction_hidden_dims = m.prediction_hidden;
  cfg.train_embeddings = m.train_embeddings;
  cfg.num_classes = num_classes(parse_task(m.task));
  cfg.embed_dim = m.embed_dim;
  if (!m.embeddings.empty()) {
    const std::size_t file_dim = embedding_file_dim(m.embeddings);
    if (cfg.embed_dim == 0) cfg.embed_dim = file_dim;
    if (cfg.embed_dim != file_dim) {
      throw ConfigError("--embed-dim " + std::to_string(cfg.embed_dim) + " conflicts with the " +
                        std::to_string(file_dim) + "-dimensional vectors in " + m.embeddings);
    }
  }
  if (cfg.embed_dim == 0) cfg.embed_dim = 300;
  std::set<std::string> removed;
  std::stringstream ss(m.ablate);
  for (std::string part; std::getline(ss, part, ',');) {
    if (part.empty()) continue;
    if (part != "attn" && part != "fl" && part != "sc") {
      throw ConfigError("--ablate accepts attn, fl and sc; got '" + part + "'");
    }
    removed.insert(part);
  }
  cfg.use_attention = !removed.count("attn");
  cfg.use_fusion = !removed.count("fl") && cfg.use_attention;
  cfg.use_shortcuts = !removed.count("sc");
  cfg.validate();
  return cfg;
}

TrainConfig train_config(const TrainOptions& t) {
  TrainConfig cfg;
  cfg.learning_rate = t.lr;
  cfg.batch_size = t.batch_size;
  cfg.epochs = t.epochs;
  cfg.seed = t.seed;
  cfg.clip_norm = t.clip_norm;
  cfg.eval_every = t.eval_every;
  cfg.validate();
  return cfg;
}

std::string effective_config(const AsimConfig& model, const TrainConfig& train, const ModelOptions& m) {
  std::ostringstream os;
  os << model.to_text() << "batch_size=" << train.batch_size << '\n'
     << "clip_norm=" << train.clip_norm << '\n'
     << "embeddings=" << m.embeddings << '\n'
     << "epochs=" << train.epochs << '\n'
     << "eval_every=" << train.eval_every << '\n'
     << "lr=" << train.learning_rate << '\n'
     << "seed=" << train.seed << '\n'
     << "task=" << m.task << '\n';
  return os.str();
}

EmbeddingTable initial_table(const ModelOptions& m, const AsimConfig& cfg, const Vocabulary& vocab,
                             std::uint64_t seed) {
  if (m.embeddings.empty()) {
    std::clog << "note: no --embeddings given; using seeded random vectors\n";
    return random_table(vocab, cfg.embed_dim, seed);
  }
  auto loaded = load_embeddings(m.embeddings, vocab, cfg.embed_dim);
  std::printf("embedding coverage: %.4f\n", loaded.coverage);
  return std::move(loaded.table);
}

Vocabulary vocab_for(const std::string& vocab_path, std::span<const TokenizedPair> train_pairs) {
  if (!vocab_path.empty()) return Vocabulary::load(vocab_path);
  return build_vocab(pair_corpus(train_pairs), 1);
}

void print_length_histogram(std::span<const TokenizedPair> pairs, std::size_t max_len) {
  std::vector<std::size_t> edges;
  for (std::size_t e : {10, 25, 50, 100, 200})
    if (e < max_len) edges.push_back(e);
  edges.push_back(max_len);
  std::vector<std::size_t> counts(edges.size(), 0);
  for (const auto& p : pairs) {
    for (std::size_t len : {p.x_tokens.size(), p.y_tokens.size()}) {
      std::size_t b = 0;
      while (b + 1 < edges.size() && len > edges[b]) ++b;
      ++counts[b];
    }
  }
  std::printf("unit length histogram (tokens):\n");
  std::size_t lo = 1;
  for (std::size_t b = 0; b < edges.size(); ++b) {
    std::printf("  %4zu-%-4zu %zu\n", lo, edges[b], counts[b]);
    lo = edges[b] + 1;
  }
}

KnowledgeUnit unit_from_flags(const std::string& title, const std::string& body, const std::string& answers,
                              const Vocabulary& vocab, std::size_t max_len, const char* side) {
  return assemble_ku(title, body, answers, vocab, max_len, side);
}

struct PairText {
  std::string x_title, x_body, x_answers, y_title, y_body, y_answers;
};

void add_pair_text_options(CLI::App* app, PairText& p) {
  app->add_option("--x-title", p.x_title, "Title of the first question");
  app->add_option("--x-body", p.x_body, "Body of the first question");
  app->add_option("--x-answers", p.x_answers, "Answers of the first question");
  app->add_option("--y-title", p.y_title, "Title of the second question");
  app->add_option("--y-body", p.y_body, "Body of the second question");
  app->add_option("--y-answers", p.y_answers, "Answers of the second question");
}

void fill_pair_from_data(PairText& text, const std::string& data, const std::string& pair_id, Task task) {
  const auto records = parse_dataset(data, task);
  for (const auto& r : records) {
    if (r.pair_id != pair_id) continue;
    text = {r.x_title, r.x_body, r.x_answers, r.y_title, r.y_body, r.y_answers};
    return;
  }
  throw DataError("pair '" + pair_id + "' not found in " + data);
}

/// Splices `--key=value` arguments from the file named by `--config` in
/// front of the remaining arguments. Keys already present on the command line
/// are skipped, so explicit flags win over the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file " + config_path);
  auto given = [&](const std::string& key) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(config_path, line_no, "expected key=value");
    auto trim = [](std::string v) {
      v.erase(0, v.find_first_not_of(" \t"));
      v.erase(v.find_last_not_of(" \t\r") + 1);
      return v;
    };
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (!given(key)) extra.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  // Insert right after the subcommand name so the options bind to it.
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(2, args.size())), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-based sentence-pair interaction model for knowledge-unit relatedness"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // preprocess
  std::string pre_input, pre_vocab, pre_cache, pre_task = "ku4";
  std::size_t pre_max_len = kDefaultMaxLen, pre_min_count = 1;
  auto* pre = app.add_subcommand("preprocess", "Tokenize a dataset TSV into a cache and a vocabulary");
  pre->add_option("--config", "Flat key=value file; command-line flags take precedence");
  pre->add_option("--input", pre_input, "Dataset TSV")->required();
  pre->add_option("--vocab-out", pre_vocab, "Vocabulary output")->required();
  pre->add_option("--cache-out", pre_cache, "Token cache output")->required();
  pre->add_option("--task", pre_task, "ku4 or binary")->check(CLI::IsMember({"ku4", "binary"}))->capture_default_str();
  pre->add_option("--max-len", pre_max_len, "Maximum tokens per knowledge unit")->capture_default_str();
  pre->add_option("--min-count", pre_min_count, "Minimum token frequency")->capture_default_str();

  // train
  ModelOptions tr_model;
  TrainOptions tr_train;
  std::string tr_train_data, tr_val_data, tr_vocab, tr_out = "asim-run";
  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--config", "Flat key=value file; command-line flags take precedence");
  tr->add_option("--train", tr_train_data, "Training split (TSV or cache)")->required();
  tr->add_option("--val", tr_val_data, "Validation split (TSV or cache)")->required();
  tr->add_option("--vocab", tr_vocab, "Vocabulary (default: built from the training split)");
  tr->add_option("--out", tr_out, "Output directory")->capture_default_str();
  add_model_options(tr, tr_model);
  add_train_options(tr, tr_train);

  // eval
  std::string ev_ckpt, ev_data, ev_task = "ku4", ev_out;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  ev->add_option("--config", "Flat key=value file; command-line flags take precedence");
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--data", ev_data, "Split to evaluate (TSV or cache)")->required();
  ev->add_option("--task", ev_task, "ku4 or binary")->check(CLI::IsMember({"ku4", "binary"}))->capture_default_str();
  ev->add_option("--out", ev_out, "Directory for report.json and report.txt");

  // predict
  std::string pr_ckpt;
  PairText pr_text;
  auto* pr = app.add_subcommand("predict", "Classify one pair of questions");
  pr->add_option("--checkpoint", pr_ckpt, "Checkpoint file")->required();
  add_pair_text_options(pr, pr_text);

  // export-attention
  std::string ex_ckpt, ex_out, ex_data, ex_pair, ex_task = "ku4";
  PairText ex_text;
  auto* ex = app.add_subcommand("export-attention", "Write the attention matrix of a pair as CSV and SVG");
  ex->add_option("--checkpoint", ex_ckpt, "Checkpoint file")->required();
  ex->add_option("--out", ex_out, "Output prefix; writes PREFIX.csv and PREFIX.svg")->required();
  ex->add_option("--data", ex_data, "Dataset TSV to take the pair from");
  ex->add_option("--pair-id", ex_pair, "Pair id inside --data");
  ex->add_option("--task", ex_task, "Task of --data")->check(CLI::IsMember({"ku4", "binary"}));
  add_pair_text_options(ex, ex_text);

  // embed
  auto* emb = app.add_subcommand("embed", "GloVe embedding tools");
  emb->require_subcommand(1);
  std::vector<fs::path> bv_corpus;
  std::string bv_out;
  std::size_t bv_min_count = 1;
  auto* bv = emb->add_subcommand("build-vocab", "Vocabulary from corpus files");
  bv->add_option("--corpus", bv_corpus, "Text files (one document per line) or token caches")->required();
  bv->add_option("--min-count", bv_min_count, "Minimum token frequency")->capture_default_str();
  bv->add_option("--out", bv_out, "Vocabulary output")->required();
  std::vector<fs::path> co_corpus;
  std::string co_vocab, co_out;
  std::size_t co_window = 10;
  auto* co = emb->add_subcommand("cooccur", "Count windowed co-occurrences");
  co->add_option("--corpus", co_corpus, "Text files or token caches")->required();
  co->add_option("--vocab", co_vocab, "Vocabulary")->required();
  co->add_option("--window", co_window, "Context window")->capture_default_str();
  co->add_option("--out", co_out, "Co-occurrence output")->required();
  GloveOptions gl_opts;
  std::string gl_counts, gl_vocab, gl_out;
  auto* gl = emb->add_subcommand("train", "Fit GloVe vectors to co-occurrence counts");
  gl->add_option("--cooccur", gl_counts, "Co-occurrence counts")->required();
  gl->add_option("--vocab", gl_vocab, "Vocabulary used for the counts")->required();
  gl->add_option("--dim", gl_opts.dim, "Vector dimension")->capture_default_str();
  gl->add_option("--epochs", gl_opts.epochs, "Passes over the counts")->capture_default_str();
  gl->add_option("--lr", gl_opts.learning_rate, "AdaGrad learning rate")->capture_default_str();
  gl->add_option("--x-max", gl_opts.x_max, "Weighting cutoff")->capture_default_str();
  gl->add_option("--alpha", gl_opts.alpha, "Weighting exponent")->capture_default_str();
  gl->add_option("--seed", gl_opts.seed, "Random seed")->capture_default_str();
  gl->add_option("--out", gl_out, "Embeddings output (GloVe text format)")->required();
  std::string in_embeddings, in_query;
  std::size_t in_k = 10;
  auto* in = emb->add_subcommand("inspect", "Nearest neighbours of a token by cosine similarity");
  in->add_option("--embeddings", in_embeddings, "GloVe-format file")->required();
  in->add_option("--query", in_query, "Token to look up")->required();
  in->add_option("--k", in_k, "Number of neighbours")->capture_default_str();

  // synth
  std::size_t sy_pairs = 1000, sy_corpus_tokens = 0;
  std::uint64_t sy_seed = 1;
  std::string sy_task = "ku4", sy_out;
  auto* sy = app.add_subcommand("synth", "Write a synthetic dataset or corpus");
  sy->add_option("--pairs", sy_pairs, "Number of pairs")->capture_default_str();
  sy->add_option("--corpus-tokens", sy_corpus_tokens, "Write a plain-text corpus of about N tokens instead");
  sy->add_option("--seed", sy_seed, "Random seed")->capture_default_str();
  sy->add_option("--task", sy_task, "ku4 or binary")->check(CLI::IsMember({"ku4", "binary"}))->capture_default_str();
  sy->add_option("--out", sy_out, "Output file")->required();

  // ablate
  ModelOptions ab_model;
  TrainOptions ab_train;
  std::string ab_train_data, ab_val_data, ab_test_data, ab_vocab, ab_out;
  std::vector<std::string> ab_variants = {"fl", "sc", "fl,sc", "attn,fl,sc"};
  auto* ab = app.add_subcommand("ablate", "Train and compare the ablation variants");
  ab->add_option("--config", "Flat key=value file; command-line flags take precedence");
  ab->add_option("--train", ab_train_data, "Training split")->required();
  ab->add_option("--val", ab_val_data, "Validation split")->required();
  ab->add_option("--test", ab_test_data, "Test split")->required();
  ab->add_option("--vocab", ab_vocab, "Vocabulary (default: built from the training split)");
  ab->add_option("--variants", ab_variants, "Variants besides the full model, separated by ';'")
      ->delimiter(';')
      ->default_str("fl;sc;fl,sc;attn,fl,sc");
  ab->add_option("--out", ab_out, "Directory for ablation.txt and ablation.json");
  add_model_options(ab, ab_model);
  ab->remove_option(ab->get_option("--ablate"));
  add_train_options(ab, ab_train);

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const asim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<char*> arg_ptrs;
  for (auto& a : args) arg_ptrs.push_back(a.data());
  CLI11_PARSE(app, static_cast<int>(arg_ptrs.size()), arg_ptrs.data());

  try {
    if (*pre) {
      const Task task = parse_task(pre_task);
      const auto records = parse_dataset(pre_input, task);
      const auto pairs = tokenize_records(records, pre_max_len);
      const Vocabulary vocab = build_vocab(pair_corpus(pairs), pre_min_count);
      vocab.save(pre_vocab);
      std::ostringstream cfg;
      cfg << "max_len=" << pre_max_len << "\nmin_count=" << pre_min_count << "\ntask=" << pre_task << '\n';
      write_cache(pre_cache, task, pairs, provenance(cfg.str(), 0));
      std::printf("records: %zu\n", records.size());
      const auto hist = label_histogram(records, task);
      for (std::size_t c = 0; c < hist.size(); ++c)
        std::printf("  %-14s %zu\n", std::string(label_names(task)[c]).c_str(), hist[c]);
      std::printf("vocabulary: %zu tokens (including reserved)\n", vocab.size());
      print_length_histogram(pairs, pre_max_len);
      std::printf("wrote %s and %s\n", pre_vocab.c_str(), pre_cache.c_str());
    } else if (*tr) {
      const AsimConfig mcfg = model_config(tr_model);
      TrainConfig tcfg = train_config(tr_train);
      const Task task = parse_task(tr_model.task);
      const std::string eff = effective_config(mcfg, tcfg, tr_model);
      std::printf("effective configuration:\n%s", eff.c_str());
      const auto train_pairs = load_pairs(tr_train_data, task, mcfg.max_len);
      const auto val_pairs = load_pairs(tr_val_data, task, mcfg.max_len);
      const Vocabulary vocab = vocab_for(tr_vocab, train_pairs);
      const auto train_enc = encode_pairs(train_pairs, vocab);
      const auto val_enc = encode_pairs(val_pairs, vocab);
      const fs::path out = tr_out;
      prepare_out_dir(out);
      tcfg.checkpoint_dir = out;
      tcfg.log_path = out / "train_log.csv";
      tcfg.provenance = provenance(eff, tcfg.seed);
      write_text(out / "config.txt", "# " + tcfg.provenance + "\n" + eff);
      AsimModel model(mcfg, vocab, initial_table(tr_model, mcfg, vocab, tcfg.seed), tcfg.seed);
      const auto result = train(std::move(model), train_enc, val_enc, tcfg, [](const EpochLog& e) {
        std::printf("epoch %3zu  loss %.6f  val_micro_f1 %.4f  %.1fs\n", e.epoch, e.train_loss, e.val_micro_f1,
                    e.seconds);
        std::fflush(stdout);
      });
      if (!result.log.empty()) std::printf("epoch1_loss %.17g\n", result.log.front().train_loss);
      if (std::isnan(result.best_val_micro_f1)) {
        std::printf("no epochs trained; wrote the initialization checkpoint\n");
      } else {
        std::printf("best epoch %zu  val_micro_f1 %.4f  (last epoch val_micro_f1 %.4f)\n", result.best_epoch,
                    result.best_val_micro_f1, result.log.back().val_micro_f1);
      }
      std::printf("checkpoint %s  hash %s\n", (out / "best.ckpt").c_str(), file_hash(out / "best.ckpt").c_str());
      std::printf("last checkpoint %s  hash %s\n", (out / "last.ckpt").c_str(), file_hash(out / "last.ckpt").c_str());
    } else if (*ev) {
      const Task task = parse_task(ev_task);
      const AsimModel model = AsimModel::load(ev_ckpt);
      if (model.config().num_classes != num_classes(task)) {
        throw ConfigError("checkpoint " + ev_ckpt + " has " + std::to_string(model.config().num_classes) +
                          " classes; task '" + ev_task + "' needs " + std::to_string(num_classes(task)));
      }
      const auto pairs = load_pairs(ev_data, task, model.config().max_len);
      const auto enc = encode_pairs(pairs, model.vocab());
      const EvalReport report = evaluate(model, enc, task);
      const std::string text = report_text(report);
      std::printf("%s", text.c_str());
      if (task == Task::kBinary) std::printf("headline accuracy %.4f\n", report.accuracy);
      if (!ev_out.empty()) {
        prepare_out_dir(ev_out);
        const std::string prov = provenance(model.config().to_text(), 0) + " checkpoint=" + file_hash(ev_ckpt);
        write_text(fs::path(ev_out) / "report.json", report_json(report, prov));
        write_text(fs::path(ev_out) / "report.txt", "# " + prov + "\n" + text);
      }
    } else if (*pr) {
      const AsimModel model = AsimModel::load(pr_ckpt);
      const auto x = unit_from_flags(pr_text.x_title, pr_text.x_body, pr_text.x_answers, model.vocab(),
                                     model.config().max_len, "side x");
      const auto y = unit_from_flags(pr_text.y_title, pr_text.y_body, pr_text.y_answers, model.vocab(),
                                     model.config().max_len, "side y");
      const auto trace = model.forward(x.token_ids, y.token_ids, Mode::kEval);
      const Task task = model.config().num_classes == 2 ? Task::kBinary : Task::kFourClass;
      const auto best = std::max_element(trace.probs.begin(), trace.probs.end()) - trace.probs.begin();
      std::printf("prediction %s\n", std::string(label_names(task)[best]).c_str());
      for (std::size_t c = 0; c < trace.probs.size(); ++c)
        std::printf("  %-14s %.6f\n", std::string(label_names(task)[c]).c_str(), trace.probs[c]);
    } else if (*ex) {
      const AsimModel model = AsimModel::load(ex_ckpt);
      if (!ex_data.empty()) {
        if (ex_pair.empty()) throw UsageError("--data needs --pair-id");
        fill_pair_from_data(ex_text, ex_data, ex_pair,
                            ex_task.empty() ? (model.config().num_classes == 2 ? Task::kBinary : Task::kFourClass)
                                            : parse_task(ex_task));
      }
      const auto x = unit_from_flags(ex_text.x_title, ex_text.x_body, ex_text.x_answers, model.vocab(),
                                     model.config().max_len, "side x");
      const auto y = unit_from_flags(ex_text.y_title, ex_text.y_body, ex_text.y_answers, model.vocab(),
                                     model.config().max_len, "side y");
      const AttentionExport att = export_attention(model, x, y);
      const std::string prov = provenance(model.config().to_text(), 0) + " checkpoint=" + file_hash(ex_ckpt);
      const fs::path prefix = ex_out;
      if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
      write_attention_csv(prefix.string() + ".csv", att, prov);
      write_attention_svg(prefix.string() + ".svg", att, prov);
      std::printf("wrote %s.csv and %s.svg (%zu x %zu)\n", prefix.c_str(), prefix.c_str(), att.rows(), att.cols());
    } else if (*bv) {
      const auto corpus = read_corpus(bv_corpus);
      const Vocabulary vocab = build_vocab(corpus, bv_min_count);
      vocab.save(bv_out);
      std::printf("vocabulary: %zu tokens (including reserved) from %zu documents\n", vocab.size(), corpus.size());
    } else if (*co) {
      const auto corpus = read_corpus(co_corpus);
      if (corpus.empty()) throw DataError("corpus is empty");
      const Vocabulary vocab = Vocabulary::load(co_vocab);
      const auto counts = count_cooccurrence(corpus, vocab, co_window);
      if (counts.empty()) throw DataError("no co-occurrences found; is the corpus empty?");
      save_cooccurrence(co_out, counts);
      std::printf("non-zero entries: %zu\n", counts.entries.size());
    } else if (*gl) {
      const Vocabulary vocab = Vocabulary::load(gl_vocab);
      auto counts = load_cooccurrence(gl_counts);
      counts.vocab_size = std::max(counts.vocab_size, vocab.size());
      const auto result = train_glove(counts, gl_opts);
      for (std::size_t e = 0; e < result.loss_history.size(); ++e)
        std::printf("epoch %3zu  loss %.6f\n", e, result.loss_history[e]);
      if (result.model.vocab_size != vocab.size()) throw DataError("co-occurrence ids exceed the vocabulary");
      save_embeddings(gl_out, result.model.to_table(), vocab);
      std::printf("wrote %s\n", gl_out.c_str());
    } else if (*in) {
      std::vector<std::string> words;
      {
        std::ifstream f(in_embeddings);
        if (!f) throw Error("cannot open embeddings file " + in_embeddings);
        std::string line;
        while (std::getline(f, line)) {
          if (line.empty()) continue;
          std::string w = line.substr(0, line.find(' '));
          if (w != kPadToken && w != kOovToken) words.push_back(w);
        }
      }
      const Vocabulary vocab = Vocabulary::from_tokens(words);
      const auto loaded = load_embeddings(in_embeddings, vocab, embedding_file_dim(in_embeddings));
      std::string query = in_query;
      if (!vocab.contains(query)) {
        const auto toks = tokenize(clean_text(in_query));
        if (toks.size() == 1) query = toks[0];
      }
      if (!vocab.contains(query)) {
        std::printf("'%s' is out of vocabulary\n", in_query.c_str());
      } else {
        for (const auto& [word, sim] : nearest_neighbors(loaded.table, vocab, query, in_k))
          std::printf("%-24s %.6f\n", word.c_str(), sim);
      }
    } else if (*sy) {
      if (sy_corpus_tokens > 0) {
        std::ofstream out(sy_out);
        if (!out) throw Error("cannot write " + sy_out);
        for (const auto& sentence : synthetic_corpus(sy_corpus_tokens, sy_seed)) {
          for (std::size_t i = 0; i < sentence.size(); ++i) out << (i ? " " : "") << sentence[i];
          out << '\n';
        }
      } else {
        const Task task = parse_task(sy_task);
        const auto records = synthetic_pairs(sy_pairs, sy_seed, task == Task::kBinary);
        if (task == Task::kBinary) write_askubuntu(sy_out, records);
        else write_ku_dataset(sy_out, records);
      }
      std::printf("wrote %s\n", sy_out.c_str());
    } else if (*ab) {
      const AsimConfig mcfg = model_config(ab_model);
      const TrainConfig tcfg = train_config(ab_train);
      const Task task = parse_task(ab_model.task);
      std::printf("effective configuration:\n%s", effective_config(mcfg, tcfg, ab_model).c_str());
      std::vector<Variant> variants;
      for (const auto& v : ab_variants) variants.push_back(parse_variant(v));
      const auto train_pairs = load_pairs(ab_train_data, task, mcfg.max_len);
      const auto val_pairs = load_pairs(ab_val_data, task, mcfg.max_len);
      const auto test_pairs = load_pairs(ab_test_data, task, mcfg.max_len);
      const Vocabulary vocab = vocab_for(ab_vocab, train_pairs);
      const auto table = initial_table(ab_model, mcfg, vocab, tcfg.seed);
      const auto rows = run_ablation(encode_pairs(train_pairs, vocab), encode_pairs(val_pairs, vocab),
                                     encode_pairs(test_pairs, vocab), mcfg, vocab, table, tcfg, variants, task,
                                     tcfg.seed);
      const std::string text = ablation_table(rows);
      std::printf("%s", text.c_str());
      if (!ab_out.empty()) {
        prepare_out_dir(ab_out);
        const std::string prov = provenance(effective_config(mcfg, tcfg, ab_model), tcfg.seed);
        write_text(fs::path(ab_out) / "ablation.txt", "# " + prov + "\n" + text);
        nlohmann::ordered_json json;
        json["provenance"] = prov;
        json["variants"] = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
          json["variants"].push_back({{"variant", variant_key(row.variant)},
                                      {"best_epoch", row.best_epoch},
                                      {"report", nlohmann::ordered_json::parse(report_json(row.report))}});
        }
        write_text(fs::path(ab_out) / "ablation.json", json.dump(2) + "\n");
      }
    }
  } catch (const asim::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const asim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
