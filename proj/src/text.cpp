#include "asim/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace asim {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
// Bytes of multi-byte UTF-8 sequences count as word characters.
bool is_word_char(char c) { return is_ascii_alpha(c) || is_digit(c) || static_cast<unsigned char>(c) >= 0x80; }
bool is_punct(char c) { return !is_word_char(c) && !is_space(c); }

char ascii_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (ascii_lower(s[i]) != prefix[i]) return false;
  return true;
}

std::string_view tag_name(std::string_view tag_body) {
  std::size_t i = 0;
  if (i < tag_body.size() && tag_body[i] == '/') ++i;
  std::size_t start = i;
  while (i < tag_body.size() && (is_ascii_alpha(tag_body[i]) || is_digit(tag_body[i]))) ++i;
  return tag_body.substr(start, i - start);
}

bool name_is(std::string_view name, std::string_view want) {
  return name.size() == want.size() && iequals_prefix(name, want);
}

// Decodes the handful of entities that matter for punctuation handling;
// anything else becomes a space.
void append_entity(std::string_view entity, std::string& out) {
  if (entity == "amp") out += '&';
  else if (entity == "lt") out += '<';
  else if (entity == "gt") out += '>';
  else if (entity == "quot") out += '"';
  else if (entity == "#39" || entity == "apos") out += '\'';
  else out += ' ';
}

// Pass 1: drop tags (and code blocks), decode entities.
std::string strip_markup(std::string_view raw, bool strip_code) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  std::string_view skip_until;  // name of the code block being skipped
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == '<' && i + 1 < raw.size() &&
        (is_ascii_alpha(raw[i + 1]) || raw[i + 1] == '/' || raw[i + 1] == '!')) {
      const std::size_t close = raw.find('>', i + 1);
      if (close != std::string_view::npos) {
        std::string_view body = raw.substr(i + 1, close - i - 1);
        std::string_view name = tag_name(body);
        const bool closing = !body.empty() && body[0] == '/';
        if (!skip_until.empty()) {
          if (closing && name_is(name, skip_until)) skip_until = {};
        } else if (strip_code && !closing && (name_is(name, "code") || name_is(name, "pre")) &&
                   (body.empty() || body.back() != '/')) {
          skip_until = name_is(name, "code") ? "code" : "pre";
        }
        out += ' ';
        i = close + 1;
        continue;
      }
    }
    if (!skip_until.empty()) {
      ++i;
      continue;
    }
    if (c == '&') {
      const std::size_t semi = raw.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 8) {
        std::string_view ent = raw.substr(i + 1, semi - i - 1);
        if (!ent.empty() && std::all_of(ent.begin(), ent.end(), [](char ch) { return is_word_char(ch) || ch == '#'; })) {
          append_entity(ent, out);
          i = semi + 1;
          continue;
        }
      }
    }
    out += c;
    ++i;
  }
  return out;
}

bool is_url(std::string_view tok) {
  return iequals_prefix(tok, "http://") || iequals_prefix(tok, "https://") || iequals_prefix(tok, "ftp://") ||
         iequals_prefix(tok, "www.");
}

// [+-]?d+([.,]d+)*
bool is_number(std::string_view tok) {
  std::size_t i = 0;
  if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
  bool need_digit = true;
  for (; i < tok.size(); ++i) {
    if (is_digit(tok[i])) {
      need_digit = false;
    } else if ((tok[i] == '.' || tok[i] == ',') && !need_digit) {
      need_digit = true;
    } else {
      return false;
    }
  }
  return !need_digit;
}

std::string_view trim_punct(std::string_view tok) {
  std::size_t b = 0, e = tok.size();
  while (b < e && is_punct(tok[b])) ++b;
  while (e > b && is_punct(tok[e - 1])) --e;
  // Keep a leading sign for the number test.
  if (b > 0 && b < e && (tok[b - 1] == '-' || tok[b - 1] == '+') && is_digit(tok[b])) --b;
  return tok.substr(b, e - b);
}

void emit(std::string& out, std::string_view piece) {
  if (piece.empty()) return;
  if (!out.empty()) out += ' ';
  out += piece;
}

template <typename Fn>
void for_each_word(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) fn(text.substr(start, i - start));
  }
}

std::vector<std::string_view> camel_split(std::string_view word) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    const char prev = word[i - 1], cur = word[i];
    const bool boundary = (is_lower(prev) && is_upper(cur)) || (is_ascii_alpha(prev) && is_digit(cur));
    if (boundary) {
      parts.push_back(word.substr(start, i - start));
      start = i;
    }
  }
  parts.push_back(word.substr(start));
  return parts;
}

}  // namespace

std::string clean_text(std::string_view raw, bool strip_code) {
  const std::string text = strip_markup(raw, strip_code);
  std::string out;
  out.reserve(text.size());
  for_each_word(text, [&](std::string_view tok) {
    if (is_url(tok)) {
      emit(out, kUrlToken);
      return;
    }
    if (is_number(trim_punct(tok))) {
      emit(out, kNumberToken);
      return;
    }
    std::size_t i = 0;
    while (i < tok.size()) {
      while (i < tok.size() && is_punct(tok[i])) ++i;
      std::size_t start = i;
      while (i < tok.size() && !is_punct(tok[i])) ++i;
      std::string_view piece = tok.substr(start, i - start);
      if (piece.empty()) continue;
      if (std::all_of(piece.begin(), piece.end(), is_digit)) {
        emit(out, kNumberToken);
      } else {
        emit(out, piece);
      }
    }
  });
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  for_each_word(cleaned, [&](std::string_view word) {
    for (std::string_view part : camel_split(word)) {
      std::string lower(part);
      std::transform(lower.begin(), lower.end(), lower.begin(), ascii_lower);
      if (lower.empty() || is_stop_word(lower)) continue;
      std::string stem = porter_stem(lower);
      if (!stem.empty()) tokens.push_back(std::move(stem));
    }
  });
  return tokens;
}

const std::vector<std::string>& stop_words() {
  // English function words; contractions appear split at the apostrophe
  // because punctuation is stripped before tokenization.
  static const std::vector<std::string> words = {
      "i",        "me",      "my",      "myself",  "we",        "our",        "ours",     "ourselves", "you",
      "your",     "yours",   "yourself", "yourselves", "he",    "him",        "his",      "himself",   "she",
      "her",      "hers",    "herself", "it",      "its",       "itself",     "they",     "them",      "their",
      "theirs",   "themselves", "what", "which",   "who",       "whom",       "this",     "that",      "these",
      "those",    "am",      "is",      "are",     "was",       "were",       "be",       "been",      "being",
      "have",     "has",     "had",     "having",  "do",        "does",       "did",      "doing",     "a",
      "an",       "the",     "and",     "but",     "if",        "or",         "because",  "as",        "until",
      "while",    "of",      "at",      "by",      "for",       "with",       "about",    "against",   "between",
      "into",     "through", "during",  "before",  "after",     "above",      "below",    "to",        "from",
      "up",       "down",    "in",      "out",     "on",        "off",        "over",     "under",     "again",
      "further",  "then",    "once",    "here",    "there",     "when",       "where",    "why",       "how",
      "all",      "any",     "both",    "each",    "few",       "more",       "most",     "other",     "some",
      "such",     "no",      "nor",     "not",     "only",      "own",        "same",     "so",        "than",
      "too",      "very",    "s",       "t",       "can",       "will",       "just",     "don",       "should",
      "now",      "d",       "ll",      "m",       "o",         "re",         "ve",       "y",         "ain",
      "aren",     "couldn",  "didn",    "doesn",   "hadn",      "hasn",       "haven",    "isn",       "ma",
      "mightn",   "mustn",   "needn",   "shan",    "shouldn",   "wasn",       "weren",    "won",       "wouldn"};
  return words;
}

bool is_stop_word(std::string_view token) {
  static const std::unordered_set<std::string_view> set = [] {
    std::unordered_set<std::string_view> s;
    for (const auto& w : stop_words()) s.insert(w);
    return s;
  }();
  return set.contains(token);
}

}  // namespace asim
