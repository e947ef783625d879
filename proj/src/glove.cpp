#include "asim/glove.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "asim/errors.hpp"

namespace asim {

double CooccurrenceCounts::count(int i, int j) const {
  auto it = entries.find({i, j});
  return it == entries.end() ? 0.0 : it->second;
}

CooccurrenceCounts count_cooccurrence(std::span<const std::vector<std::string>> corpus, const Vocabulary& vocab,
                                      std::size_t window) {
  if (window < 1) throw ConfigError("co-occurrence window must be at least 1");
  CooccurrenceCounts counts;
  counts.window = window;
  counts.vocab_size = vocab.size();
  for (const auto& seq : corpus) {
    const std::vector<int> ids = vocab.encode(seq);
    for (std::size_t a = 0; a < ids.size(); ++a) {
      if (ids[a] < 2) continue;
      for (std::size_t d = 1; d <= window && a + d < ids.size(); ++d) {
        const int i = ids[a], j = ids[a + d];
        if (j < 2) continue;
        const double w = 1.0 / static_cast<double>(d);
        counts.entries[{i, j}] += w;
        counts.entries[{j, i}] += w;
      }
    }
  }
  return counts;
}

void save_cooccurrence(const std::filesystem::path& path, const CooccurrenceCounts& counts) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# cooccurrence window=" << counts.window << " vocab=" << counts.vocab_size << '\n';
  out.precision(17);
  for (const auto& [key, v] : counts.entries) out << key.first << ' ' << key.second << ' ' << v << '\n';
}

CooccurrenceCounts load_cooccurrence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CooccurrenceCounts counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::sscanf(line.c_str(), "# cooccurrence window=%zu vocab=%zu", &counts.window, &counts.vocab_size);
      continue;
    }
    int i = 0, j = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%d %d %lf", &i, &j, &v) != 3 || v < 0.0) {
      throw ParseError(path.string(), line_no, "expected 'row col weight'");
    }
    counts.entries[{i, j}] = v;
  }
  return counts;
}

EmbeddingTable GloveModel::to_table() const {
  EmbeddingTable t;
  t.dim = dim;
  t.vectors.assign(vocab_size * dim, 0.0);
  for (std::size_t i = 2; i < vocab_size; ++i)
    for (std::size_t k = 0; k < dim; ++k) t.vectors[i * dim + k] = w[i * dim + k] + w_ctx[i * dim + k];
  if (vocab_size > 1) {
    const auto oov = oov_vector(dim);
    std::copy(oov.begin(), oov.end(), t.row(kOovId).begin());
  }
  return t;
}

double glove_weight(double x, double x_max, double alpha) { return x < x_max ? std::pow(x / x_max, alpha) : 1.0; }

double glove_objective(const CooccurrenceCounts& counts, const GloveModel& model, double x_max, double alpha) {
  double loss = 0.0;
  const std::size_t d = model.dim;
  for (const auto& [key, x] : counts.entries) {
    const auto [i, j] = key;
    double inner = 0.0;
    for (std::size_t k = 0; k < d; ++k) inner += model.w[i * d + k] * model.w_ctx[j * d + k];
    const double diff = inner + model.b[i] + model.b_ctx[j] - std::log(x);
    loss += glove_weight(x, x_max, alpha) * diff * diff;
  }
  return loss;
}

GloveModel init_glove(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  GloveModel m;
  m.vocab_size = vocab_size;
  m.dim = dim;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  const double s = 1.0 / static_cast<double>(dim);
  m.w.resize(vocab_size * dim);
  m.w_ctx.resize(vocab_size * dim);
  for (auto& v : m.w) v = dist(gen) * s;
  for (auto& v : m.w_ctx) v = dist(gen) * s;
  m.b.assign(vocab_size, 0.0);
  m.b_ctx.assign(vocab_size, 0.0);
  return m;
}

GloveResult train_glove(const CooccurrenceCounts& counts, const GloveOptions& options) {
  if (counts.empty()) throw DataError("train_glove: co-occurrence counts are empty");
  if (options.dim == 0) throw ConfigError("train_glove: dimension must be positive");
  if (!(options.learning_rate > 0.0)) throw ConfigError("train_glove: learning rate must be positive");
  std::size_t vocab_size = counts.vocab_size;
  for (const auto& [key, x] : counts.entries) {
    vocab_size = std::max<std::size_t>(vocab_size, static_cast<std::size_t>(std::max(key.first, key.second)) + 1);
  }

  GloveResult result{init_glove(vocab_size, options.dim, options.seed), {}};
  GloveModel& m = result.model;
  const std::size_t d = options.dim;
  // AdaGrad accumulators start at 1 as in the reference implementation.
  std::vector<double> gw(m.w.size(), 1.0), gwc(m.w_ctx.size(), 1.0), gb(vocab_size, 1.0), gbc(vocab_size, 1.0);

  std::vector<std::pair<std::pair<int, int>, double>> entries(counts.entries.begin(), counts.entries.end());
  std::mt19937_64 gen(options.seed ^ 0x9e3779b97f4a7c15ULL);
  result.loss_history.push_back(glove_objective(counts, m, options.x_max, options.alpha));

  std::vector<double> tmp(d);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(entries.begin(), entries.end(), gen);
    for (const auto& [key, x] : entries) {
      const std::size_t i = key.first, j = key.second;
      double* wi = &m.w[i * d];
      double* wj = &m.w_ctx[j * d];
      double inner = 0.0;
      for (std::size_t k = 0; k < d; ++k) inner += wi[k] * wj[k];
      const double diff = inner + m.b[i] + m.b_ctx[j] - std::log(x);
      const double fdiff = glove_weight(x, options.x_max, options.alpha) * diff;
      const double lr = options.learning_rate;
      for (std::size_t k = 0; k < d; ++k) {
        const double g_i = fdiff * wj[k];
        const double g_j = fdiff * wi[k];
        tmp[k] = g_j;
        wi[k] -= lr * g_i / std::sqrt(gw[i * d + k]);
        gw[i * d + k] += g_i * g_i;
      }
      for (std::size_t k = 0; k < d; ++k) {
        wj[k] -= lr * tmp[k] / std::sqrt(gwc[j * d + k]);
        gwc[j * d + k] += tmp[k] * tmp[k];
      }
      m.b[i] -= lr * fdiff / std::sqrt(gb[i]);
      gb[i] += fdiff * fdiff;
      m.b_ctx[j] -= lr * fdiff / std::sqrt(gbc[j]);
      gbc[j] += fdiff * fdiff;
    }
    const double loss = glove_objective(counts, m, options.x_max, options.alpha);
    if (!std::isfinite(loss)) {
      throw DivergenceError("GloVe loss became non-finite at epoch " + std::to_string(epoch + 1) +
                            "; try a smaller learning rate");
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

}  // namespace asim
