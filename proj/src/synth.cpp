#include "asim/synth.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "asim/errors.hpp"
#include "asim/text.hpp"

namespace asim {
namespace {

constexpr std::size_t kTopics = 40;
constexpr std::size_t kTopicWords = 10;
constexpr std::size_t kFillers = 40;
constexpr std::size_t kMarkersPerClass = 3;
constexpr std::size_t kPoolSize = kTopics * kTopicWords + kFillers + 4 * kMarkersPerClass;

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : gen_(seed) {}

  const std::string& topic_word(std::size_t topic, std::size_t i) const {
    return synthetic_words()[topic * kTopicWords + i];
  }
  const std::string& filler(std::size_t i) const { return synthetic_words()[kTopics * kTopicWords + i]; }
  const std::string& marker(int label, std::size_t i) const {
    return synthetic_words()[kTopics * kTopicWords + kFillers + static_cast<std::size_t>(label) * kMarkersPerClass + i];
  }

  std::size_t uniform(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_) < p; }

  std::vector<std::string> topic_sample(std::size_t topic, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(topic_word(topic, uniform(kTopicWords)));
    return out;
  }

  std::vector<std::string> with_fillers(std::vector<std::string> words, std::size_t n_fillers) {
    for (std::size_t i = 0; i < n_fillers; ++i) words.push_back(filler(uniform(kFillers)));
    std::shuffle(words.begin(), words.end(), gen_);
    return words;
  }

  /// Keeps roughly `share` of `source` and fills the rest from `topic`.
  std::vector<std::string> overlap(const std::vector<std::string>& source, double share, std::size_t topic) {
    std::vector<std::string> out;
    for (const auto& w : source) out.push_back(chance(share) ? w : topic_word(topic, uniform(kTopicWords)));
    std::shuffle(out.begin(), out.end(), gen_);
    return out;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

std::string join(const std::vector<std::string>& words, bool title) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += (title && i == 0) ? capitalize(words[i]) : words[i];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& synthetic_words() {
  static const std::vector<std::string> pool = [] {
    static constexpr char kOnsets[] = "bdfgklmnprstvz";
    static constexpr char kVowels[] = "aeiou";
    std::mt19937_64 gen(20190101);
    std::vector<std::string> words;
    std::set<std::string> seen;
    while (words.size() < kPoolSize) {
      const std::size_t syllables = 2 + gen() % 2;
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[gen() % (sizeof kOnsets - 1)];
        w += kVowels[gen() % (sizeof kVowels - 1)];
      }
      w += kOnsets[gen() % (sizeof kOnsets - 1)];
      // Stable under the tokenizer so surface and stemmed forms coincide.
      if (is_stop_word(w) || porter_stem(w) != w || !seen.insert(w).second) continue;
      words.push_back(w);
    }
    return words;
  }();
  return pool;
}

std::vector<RawRecord> synthetic_pairs(std::size_t n_pairs, std::uint64_t seed, bool binary) {
  Generator g(seed);
  std::vector<RawRecord> records;
  records.reserve(n_pairs);
  for (std::size_t n = 0; n < n_pairs; ++n) {
    const int label = static_cast<int>(n % 4);
    const std::size_t topic = g.uniform(kTopics);
    RawRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", n + 1);
    r.pair_id = id;
    std::snprintf(id, sizeof id, "q%06zu", 2 * n + 1);
    r.x_id = id;
    std::snprintf(id, sizeof id, "q%06zu", 2 * n + 2);
    r.y_id = id;

    const auto x_title = g.topic_sample(topic, 5);
    const auto x_body = g.with_fillers(g.topic_sample(topic, 5), 2);
    r.x_title = join(x_title, true);
    r.x_body = "<p>" + join(x_body, false) + "</p>";
    r.x_answers = g.chance(0.3) ? "null" : join(g.with_fillers(g.topic_sample(topic, 3), 1), false);

    std::vector<std::string> y_title, y_body;
    switch (label) {
      case 0:  // duplicate
        y_title = g.overlap(x_title, 0.8, topic);
        y_body = g.with_fillers(g.overlap(x_body, 0.6, topic), 1);
        break;
      case 1:  // direct
        y_title = g.overlap(x_title, 0.4, topic);
        y_body = g.with_fillers(g.topic_sample(topic, 5), 2);
        break;
      case 2: {  // indirect: neighbouring topic, a couple of shared words
        const std::size_t near = (topic + 1) % kTopics;
        y_title = g.topic_sample(near, 4);
        y_title.push_back(x_title[g.uniform(x_title.size())]);
        std::shuffle(y_title.begin(), y_title.end(), g.engine());
        y_body = g.with_fillers(g.topic_sample(near, 5), 2);
        break;
      }
      default: {  // isolated
        const std::size_t far = (topic + kTopics / 2 + g.uniform(kTopics / 4)) % kTopics;
        y_title = g.topic_sample(far, 5);
        y_body = g.with_fillers(g.topic_sample(far, 5), 2);
        break;
      }
    }
    if (g.chance(0.85)) y_body.insert(y_body.begin() + static_cast<std::ptrdiff_t>(g.uniform(y_body.size())),
                                      g.marker(label, g.uniform(kMarkersPerClass)));
    r.y_title = join(y_title, true);
    r.y_body = "<p>" + join(y_body, false) + "</p>";
    r.y_answers = g.chance(0.3) ? "null" : join(g.with_fillers(g.topic_sample(topic, 2), 2), false);
    r.label = binary ? (label == 0 ? 0 : 1) : label;
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<std::vector<std::string>> synthetic_corpus(std::size_t n_tokens, std::uint64_t seed) {
  if (n_tokens == 0) throw ConfigError("synthetic corpus needs at least one token");
  Generator g(seed);
  std::vector<std::vector<std::string>> corpus;
  std::size_t produced = 0;
  while (produced < n_tokens) {
    const std::size_t len = std::min<std::size_t>(8 + g.uniform(8), n_tokens - produced);
    // A small topic subset keeps co-occurrences dense.
    auto sentence = g.with_fillers(g.topic_sample(g.uniform(6), len > 2 ? len - 2 : len), len > 2 ? 2 : 0);
    produced += sentence.size();
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace asim
