#include "asim/dataset.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "asim/errors.hpp"
#include "asim/text.hpp"

namespace asim {
namespace {

constexpr std::array<std::string_view, 4> kFourLabels = {"duplicate", "direct", "indirect", "isolated"};
constexpr std::array<std::string_view, 2> kBinaryLabels = {"duplicate", "non-duplicate"};
constexpr std::string_view kCacheMagic = "#asim-cache";

template <typename RowFn>
std::vector<RawRecord> parse_rows(const std::filesystem::path& path, Task task, std::size_t columns,
                                  std::string_view first_column, RowFn&& fill) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file " + path.string());
  std::vector<RawRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tsv_line(line);
    if (records.empty() && seen.empty() && !fields.empty() && fields[0] == first_column) continue;
    if (fields.size() != columns) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(columns) + " columns, found " + std::to_string(fields.size()));
    }
    RawRecord r;
    fill(r, fields);
    const std::string& label = fields.back();
    r.label = label_index(task, label);
    if (r.label < 0) throw ParseError(path.string(), line_no, "unknown label '" + label + "'");
    if (!seen.insert(r.pair_id).second) {
      throw ParseError(path.string(), line_no, "duplicate pair_id '" + r.pair_id + "'");
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) std::clog << "warning: " << path.string() << " contains no records\n";
  return records;
}

void write_rows(const std::filesystem::path& path, std::span<const std::string_view> header,
                const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "\t" : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << tsv_escape(row[i]);
    out << '\n';
  }
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string_view task_name(Task task) { return task == Task::kFourClass ? "ku4" : "binary"; }

Task parse_task(std::string_view name) {
  if (name == "ku4") return Task::kFourClass;
  if (name == "binary") return Task::kBinary;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected ku4 or binary)");
}

std::size_t num_classes(Task task) { return label_names(task).size(); }

std::span<const std::string_view> label_names(Task task) {
  if (task == Task::kFourClass) return kFourLabels;
  return kBinaryLabels;
}

int label_index(Task task, std::string_view label) {
  auto names = label_names(task);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == label) return static_cast<int>(i);
  return -1;
}

std::string tsv_escape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tsv_unescape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == '\\' && i + 1 < field.size()) {
      const char n = field[i + 1];
      if (n == 't' || n == 'n' || n == 'r' || n == '\\') {
        out += n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : '\\';
        ++i;
        continue;
      }
    }
    out += field[i];
  }
  return out;
}

std::vector<std::string> split_tsv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(tsv_unescape(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::vector<RawRecord> parse_ku_dataset(const std::filesystem::path& path) {
  return parse_rows(path, Task::kFourClass, kKuColumns.size(), kKuColumns[0],
                    [](RawRecord& r, std::vector<std::string>& f) {
                      r.pair_id = std::move(f[0]);
                      r.x_id = std::move(f[1]);
                      r.x_title = std::move(f[2]);
                      r.x_body = std::move(f[3]);
                      r.x_answers = std::move(f[4]);
                      r.y_id = std::move(f[5]);
                      r.y_title = std::move(f[6]);
                      r.y_body = std::move(f[7]);
                      r.y_answers = std::move(f[8]);
                    });
}

std::vector<RawRecord> parse_askubuntu(const std::filesystem::path& path) {
  return parse_rows(path, Task::kBinary, kAskUbuntuColumns.size(), kAskUbuntuColumns[0],
                    [](RawRecord& r, std::vector<std::string>& f) {
                      r.pair_id = std::move(f[0]);
                      r.x_title = std::move(f[1]);
                      r.x_body = std::move(f[2]);
                      r.y_title = std::move(f[3]);
                      r.y_body = std::move(f[4]);
                    });
}

std::vector<RawRecord> parse_dataset(const std::filesystem::path& path, Task task) {
  return task == Task::kFourClass ? parse_ku_dataset(path) : parse_askubuntu(path);
}

void write_ku_dataset(const std::filesystem::path& path, std::span<const RawRecord> records) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) {
    rows.push_back({r.pair_id, r.x_id, r.x_title, r.x_body, r.x_answers, r.y_id, r.y_title, r.y_body, r.y_answers,
                    std::string(kFourLabels.at(r.label))});
  }
  write_rows(path, kKuColumns, rows);
}

void write_askubuntu(const std::filesystem::path& path, std::span<const RawRecord> records) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) {
    rows.push_back({r.pair_id, r.x_title, r.x_body, r.y_title, r.y_body, std::string(kBinaryLabels.at(r.label))});
  }
  write_rows(path, kAskUbuntuColumns, rows);
}

std::vector<std::size_t> label_histogram(std::span<const RawRecord> records, Task task) {
  std::vector<std::size_t> h(num_classes(task), 0);
  for (const auto& r : records) h.at(r.label) += 1;
  return h;
}

std::vector<std::string> unit_tokens(std::string_view title, std::string_view body, std::string_view answers,
                                     std::size_t* body_begin, std::size_t* answers_begin) {
  if (answers == "null") answers = {};
  std::vector<std::string> tokens = tokenize(clean_text(title));
  if (body_begin) *body_begin = tokens.size();
  for (auto& t : tokenize(clean_text(body))) tokens.push_back(std::move(t));
  if (answers_begin) *answers_begin = tokens.size();
  for (auto& t : tokenize(clean_text(answers))) tokens.push_back(std::move(t));
  return tokens;
}

KnowledgeUnit assemble_ku(std::string_view title, std::string_view body, std::string_view answers,
                          const Vocabulary& vocab, std::size_t max_len, std::string_view context) {
  KnowledgeUnit ku;
  ku.tokens = unit_tokens(title, body, answers, &ku.body_begin, &ku.answers_begin);
  if (ku.tokens.empty()) throw EmptyUnitError(context.empty() ? std::string("no context") : std::string(context));
  if (ku.tokens.size() > max_len) ku.tokens.resize(max_len);
  ku.body_begin = std::min(ku.body_begin, ku.tokens.size());
  ku.answers_begin = std::min(ku.answers_begin, ku.tokens.size());
  ku.token_ids = vocab.encode(ku.tokens);
  return ku;
}

std::vector<TokenizedPair> tokenize_records(std::span<const RawRecord> records, std::size_t max_len) {
  std::vector<TokenizedPair> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    TokenizedPair p;
    p.pair_id = r.pair_id;
    p.label = r.label;
    p.x_tokens = unit_tokens(r.x_title, r.x_body, r.x_answers);
    p.y_tokens = unit_tokens(r.y_title, r.y_body, r.y_answers);
    if (p.x_tokens.empty()) throw EmptyUnitError("pair " + r.pair_id + ", side x");
    if (p.y_tokens.empty()) throw EmptyUnitError("pair " + r.pair_id + ", side y");
    if (p.x_tokens.size() > max_len) p.x_tokens.resize(max_len);
    if (p.y_tokens.size() > max_len) p.y_tokens.resize(max_len);
    out.push_back(std::move(p));
  }
  return out;
}

void write_cache(const std::filesystem::path& path, Task task, std::span<const TokenizedPair> pairs,
                 std::string_view provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write cache " + path.string());
  out << kCacheMagic << " task=" << task_name(task) << " pairs=" << pairs.size() << '\n';
  if (!provenance.empty()) out << "# " << provenance << '\n';
  for (const auto& p : pairs) {
    out << tsv_escape(p.pair_id) << '\t' << label_names(task)[p.label] << '\t' << join(p.x_tokens) << '\t'
        << join(p.y_tokens) << '\n';
  }
}

bool is_cache_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  return in && std::getline(in, line) && line.starts_with(kCacheMagic);
}

std::vector<TokenizedPair> read_cache(const std::filesystem::path& path, Task* task_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open cache " + path.string());
  std::string line;
  if (!std::getline(in, line) || !line.starts_with(kCacheMagic)) {
    throw ParseError(path.string(), 1, "missing " + std::string(kCacheMagic) + " header");
  }
  const auto pos = line.find("task=");
  if (pos == std::string::npos) throw ParseError(path.string(), 1, "header lacks task=");
  std::istringstream hs(line.substr(pos + 5));
  std::string task_str;
  hs >> task_str;
  const Task task = parse_task(task_str);
  if (task_out) *task_out = task;

  std::vector<TokenizedPair> pairs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tsv_line(line);
    if (f.size() != 4) throw ParseError(path.string(), line_no, "expected 4 columns");
    TokenizedPair p;
    p.pair_id = f[0];
    p.label = label_index(task, f[1]);
    if (p.label < 0) throw ParseError(path.string(), line_no, "unknown label '" + f[1] + "'");
    p.x_tokens = split_spaces(f[2]);
    p.y_tokens = split_spaces(f[3]);
    if (p.x_tokens.empty() || p.y_tokens.empty()) throw ParseError(path.string(), line_no, "empty token sequence");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<EncodedPair> encode_pairs(std::span<const TokenizedPair> pairs, const Vocabulary& vocab) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({vocab.encode(p.x_tokens), vocab.encode(p.y_tokens), p.label});
  return out;
}

}  // namespace asim
