#include "asim/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "asim/errors.hpp"

namespace asim {

std::vector<double> oov_vector(std::size_t dim) {
  std::mt19937_64 gen(kOovSeed);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  std::vector<double> v(dim);
  for (auto& x : v) x = dist(gen);
  return v;
}

EmbeddingTable oov_table(const Vocabulary& vocab, std::size_t dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingTable t;
  t.dim = dim;
  t.vectors.assign(vocab.size() * dim, 0.0);
  const auto oov = oov_vector(dim);
  for (std::size_t r = 1; r < vocab.size(); ++r) std::copy(oov.begin(), oov.end(), t.row(r).begin());
  return t;
}

EmbeddingTable random_table(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingTable t = oov_table(vocab, dim);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (std::size_t r = 2; r < vocab.size(); ++r)
    for (auto& x : t.row(r)) x = dist(gen);
  return t;
}

EmbeddingLoad load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file " + path.string());
  EmbeddingLoad result{oov_table(vocab, dim), 0.0};
  std::vector<bool> found(vocab.size(), false);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) throw ParseError(path.string(), line_no, "expected word and values");
    const std::string word = line.substr(0, space);
    values.clear();
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ') || !std::isfinite(v)) {
        throw ParseError(path.string(), line_no, "malformed value for '" + word + "'");
      }
      values.push_back(v);
      p = next;
    }
    if (values.size() != dim) {
      if (line_no == 1 && !values.empty()) {
        throw ConfigError(path.string() + " holds " + std::to_string(values.size()) + "-dimensional vectors, expected " +
                          std::to_string(dim));
      }
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(dim) + " values, found " + std::to_string(values.size()));
    }
    if (!vocab.contains(word)) continue;
    const int id = vocab.id(word);
    if (id == kPadId) continue;
    std::copy(values.begin(), values.end(), result.table.row(id).begin());
    found[id] = true;
  }
  std::size_t hits = 0;
  for (std::size_t i = 2; i < found.size(); ++i) hits += found[i];
  result.coverage = vocab.size() > 2 ? static_cast<double>(hits) / static_cast<double>(vocab.size() - 2) : 0.0;
  return result;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, const Vocabulary& vocab) {
  if (table.rows() != vocab.size()) throw DimensionError("embedding table rows do not match vocabulary size");
  std::ofstream out(path);
  if (!out) throw Error("cannot write embeddings file " + path.string());
  char buf[64];
  for (std::size_t r = 2; r < vocab.size(); ++r) {
    out << vocab.token(static_cast<int>(r));
    for (double v : table.row(r)) {
      std::snprintf(buf, sizeof buf, " %.6f", v);
      // "-0.000000" and "0.000000" load identically; keep the canonical form.
      out << (std::string_view(buf) == " -0.000000" ? " 0.000000" : buf);
    }
    out << '\n';
  }
}

std::span<const double> lookup(const EmbeddingTable& table, const Vocabulary& vocab, std::string_view token) {
  return table.row(vocab.id(token));
}

std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingTable& table, const Vocabulary& vocab,
                                                              std::string_view query, std::size_t k) {
  auto norm = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const int qid = vocab.id(query);
  auto q = table.row(qid);
  const double qn = norm(q);
  std::vector<std::pair<std::string, double>> scored;
  for (std::size_t r = 2; r < vocab.size(); ++r) {
    if (static_cast<int>(r) == qid) continue;
    auto v = table.row(r);
    const double vn = norm(v);
    double d = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) d += q[j] * v[j];
    scored.emplace_back(vocab.token(static_cast<int>(r)), qn > 0 && vn > 0 ? d / (qn * vn) : 0.0);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

}  // namespace asim
