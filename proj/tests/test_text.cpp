#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "asim/dataset.hpp"
#include "asim/errors.hpp"
#include "asim/synth.hpp"
#include "asim/text.hpp"
#include "test_util.hpp"

using namespace asim;
using asim::testing::TempDir;
using asim::testing::write_file;
using Tokens = std::vector<std::string>;

namespace {

std::string join(const Tokens& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? " " : "") + t[i];
  return out;
}

std::string ku_row(const std::string& pair_id, const std::string& label, const std::string& x_title = "Arrays in java",
                   const std::string& y_title = "Lists in java") {
  return pair_id + "\tq1\t" + x_title + "\tbody one\tnull\tq2\t" + y_title + "\tbody two\tanswer text\t" + label + "\n";
}

}  // namespace

TEST(CleanText, UrlSentinel) { EXPECT_EQ(clean_text("<p>see https://x.io now</p>"), "see urltok now"); }

TEST(CleanText, CodeBlockAndNumber) {
  EXPECT_EQ(clean_text("<code>int x=1;</code>use 42 threads", true), "use numtok threads");
}

TEST(CleanText, CodeKeptWhenNotStripping) {
  EXPECT_EQ(clean_text("<code>int x=1;</code>use 42 threads", false), "int x numtok use numtok threads");
}

TEST(CleanText, Empty) { EXPECT_EQ(clean_text(""), ""); }

TEST(CleanText, MalformedMarkupNeverThrows) {
  for (const char* raw : {"<", "<<<>>>", "<p", "</", "&", "&amp", "<code>never closed", "a < b > c", "\x80\xff<"})
    EXPECT_NO_THROW(clean_text(raw)) << raw;
}

TEST(CleanText, Idempotent) {
  std::mt19937_64 rng(4);
  const std::string alphabet = "ab Cd<>/&;:.,!?0123456789 \t\nhttp://www.";
  std::vector<std::string> samples = {"<p>see https://x.io now</p>", "List&lt;T&gt; 3.14 x", "TreeMap, getValue()!"};
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const std::size_t len = rng() % 40;
    for (std::size_t j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    samples.push_back(s);
  }
  for (const auto& s : samples) {
    const std::string once = clean_text(s);
    EXPECT_EQ(clean_text(once), once) << s;
  }
}

TEST(Tokenize, TitleFromExample) {
  EXPECT_EQ(tokenize("Removing html tags with regex Java"), (Tokens{"remov", "html", "tag", "regex", "java"}));
}

TEST(Tokenize, CamelCase) { EXPECT_EQ(tokenize("TreeMap getValue"), (Tokens{"tree", "map", "get", "valu"})); }

TEST(Tokenize, AllStopWords) { EXPECT_TRUE(tokenize("the of and").empty()); }

TEST(Tokenize, NoUppercaseNoStopWords) {
  const std::string cleaned = clean_text(
      "The QuickBrown fox JumpsOver THE lazy dog; It IS what it is. AndThen SOME MoreWords here2go");
  for (const auto& t : tokenize(cleaned)) {
    for (char c : t) EXPECT_FALSE(c >= 'A' && c <= 'Z') << t;
    EXPECT_FALSE(is_stop_word(t)) << t;
  }
}

// Expected stems produced offline by NLTK's PorterStemmer in ORIGINAL_ALGORITHM mode.
TEST(PorterStem, ReferenceOutputs) {
  const std::pair<const char*, const char*> cases[] = {
      {"removing", "remov"},     {"tags", "tag"},         {"value", "valu"},       {"is", "i"},
      {"as", "a"},               {"probabli", "probabl"}, {"generalization", "gener"},
      {"agreed", "agre"},        {"happy", "happi"},      {"caresses", "caress"},  {"ponies", "poni"},
      {"cats", "cat"},           {"feed", "feed"},        {"plastered", "plaster"}, {"motoring", "motor"},
      {"sing", "sing"},          {"conflated", "conflat"}, {"hopping", "hop"},     {"falling", "fall"},
      {"filing", "file"},        {"relational", "relat"}, {"conditional", "condit"}, {"rational", "ration"},
      {"digitizer", "digit"},    {"triplicate", "triplic"}, {"hopeful", "hope"},   {"goodness", "good"},
      {"revival", "reviv"},      {"adjustment", "adjust"}, {"controll", "control"}, {"roll", "roll"},
      {"a", "a"},                {"", ""}};
  for (const auto& [word, stem] : cases) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(AssembleKu, TitleOnly) {
  const Vocabulary vocab;
  const KnowledgeUnit ku = assemble_ku("How to remove HTML tag in Java", "", "", vocab);
  EXPECT_EQ(ku.tokens, (Tokens{"remov", "html", "tag", "java"}));
  EXPECT_EQ(ku.token_ids.size(), 4u);
  for (int id : ku.token_ids) EXPECT_EQ(id, kOovId);
}

TEST(AssembleKu, TruncatesTo250KeepingHead) {
  std::string body;
  std::vector<std::string> words;
  for (int i = 0; i < 300; ++i) {
    std::string w = "w";
    for (int n = i; n; n /= 26) w += static_cast<char>('a' + n % 26);
    w += "qz";
    words.push_back(w);
    body += w + " ";
  }
  const KnowledgeUnit ku = assemble_ku("", body, "", Vocabulary());
  ASSERT_EQ(ku.size(), 250u);
  EXPECT_EQ(ku.token_ids.size(), 250u);
  for (std::size_t i = 0; i < 250; ++i) EXPECT_EQ(ku.tokens[i], porter_stem(words[i]));
}

TEST(AssembleKu, NullAnswersAreEmpty) {
  const KnowledgeUnit with_null = assemble_ku("Sorting arrays", "quick sort", "null", Vocabulary());
  const KnowledgeUnit with_empty = assemble_ku("Sorting arrays", "quick sort", "", Vocabulary());
  EXPECT_EQ(with_null.tokens, with_empty.tokens);
  EXPECT_EQ(with_null.answers_begin, with_null.size());
}

TEST(AssembleKu, PartOffsets) {
  const KnowledgeUnit ku = assemble_ku("Parsing json", "with jackson library", "use gson", Vocabulary());
  EXPECT_EQ(ku.tokens, (Tokens{"pars", "json", "jackson", "librari", "us", "gson"}));
  EXPECT_EQ(ku.body_begin, 2u);
  EXPECT_EQ(ku.answers_begin, 4u);
}

TEST(AssembleKu, EmptyUnitCarriesContext) {
  try {
    assemble_ku("the of", "<code>x</code>", "null", Vocabulary(), kDefaultMaxLen, "pair p17, side x");
    FAIL() << "expected EmptyUnitError";
  } catch (const EmptyUnitError& e) {
    EXPECT_NE(std::string(e.what()).find("p17"), std::string::npos);
  }
}

TEST(AssembleKu, LengthAlwaysWithinBounds) {
  for (const auto& r : synthetic_pairs(100, 3)) {
    const KnowledgeUnit ku = assemble_ku(r.x_title, r.x_body, r.x_answers, Vocabulary());
    EXPECT_GE(ku.size(), 1u);
    EXPECT_LE(ku.size(), kDefaultMaxLen);
    EXPECT_EQ(ku.size(), ku.token_ids.size());
  }
}

// Fixtures and expected tokens come from tools/make_golden.py.
TEST(GoldenSuite, AllFixturesMatchByteExactly) {
  std::ifstream in(std::string(ASIM_TEST_DATA_DIR) + "/golden_tokens.tsv");
  ASSERT_TRUE(in);
  std::string line;
  std::getline(in, line);  // header
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_tsv_line(line);
    ASSERT_EQ(cells.size(), 5u) << line;
    const std::string name = tsv_unescape(cells[0]);
    auto tokens = unit_tokens(tsv_unescape(cells[1]), tsv_unescape(cells[2]), tsv_unescape(cells[3]));
    if (tokens.size() > kDefaultMaxLen) tokens.resize(kDefaultMaxLen);
    EXPECT_EQ(join(tokens), tsv_unescape(cells[4])) << "fixture " << name;
    ++count;
  }
  EXPECT_EQ(count, 25u);
}

TEST(Tsv, EscapeRoundTrip) {
  const std::string s = "a\tb\nc\\d\re";
  EXPECT_EQ(tsv_escape(s).find('\t'), std::string::npos);
  EXPECT_EQ(tsv_unescape(tsv_escape(s)), s);
}

TEST(ParseKu, DuplicateRowFromTable) {
  TempDir dir("ku");
  const std::string row =
      "p1\t36734301\tHow to declare a call a 2d array in java\tI am trying to read an image's pixels and fill them in "
      "a 2d array however I do not know how to declare a global array any help please\tnull\t19894714\tHow can I "
      "create 2D arrays in java\tHow would I go about designing something like this using 2D arrays in java "
      "Everything works but name i j = 200 when i put this it only prints this and nothing else\tYou would replace "
      "name with what you would like to name the array\tduplicate\n";
  write_file(dir / "ku.tsv", row);
  const auto records = parse_ku_dataset(dir / "ku.tsv");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].label, label_index(Task::kFourClass, "duplicate"));
  EXPECT_EQ(records[0].x_id, "36734301");
  EXPECT_EQ(records[0].y_id, "19894714");
  EXPECT_EQ(records[0].x_answers, "null");
}

TEST(ParseKu, HeaderRowOptional) {
  TempDir dir("ku");
  std::string text;
  for (std::size_t i = 0; i < kKuColumns.size(); ++i) text += std::string(i ? "\t" : "") + std::string(kKuColumns[i]);
  text += "\n" + ku_row("p1", "direct");
  write_file(dir / "ku.tsv", text);
  const auto records = parse_ku_dataset(dir / "ku.tsv");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].label, 1);
}

TEST(ParseKu, UnknownLabelNamesRow) {
  TempDir dir("ku");
  write_file(dir / "ku.tsv", ku_row("p1", "duplicate") + ku_row("p2", "related"));
  try {
    parse_ku_dataset(dir / "ku.tsv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("related"), std::string::npos);
  }
}

TEST(ParseKu, ColumnCountMismatch) {
  TempDir dir("ku");
  write_file(dir / "ku.tsv", ku_row("p1", "isolated") + "p2\tq1\ttitle\n");
  try {
    parse_ku_dataset(dir / "ku.tsv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseKu, RepeatedPairId) {
  TempDir dir("ku");
  write_file(dir / "ku.tsv", ku_row("p1", "isolated") + ku_row("p1", "direct"));
  EXPECT_THROW(parse_ku_dataset(dir / "ku.tsv"), ParseError);
}

TEST(ParseKu, EmptyFile) {
  TempDir dir("ku");
  write_file(dir / "ku.tsv", "");
  EXPECT_TRUE(parse_ku_dataset(dir / "ku.tsv").empty());
}

TEST(ParseKu, HundredRowRoundTripHistogram) {
  TempDir dir("ku");
  const auto records = synthetic_pairs(100, 9);
  write_ku_dataset(dir / "ku.tsv", records);
  const auto parsed = parse_ku_dataset(dir / "ku.tsv");
  ASSERT_EQ(parsed.size(), 100u);
  EXPECT_EQ(label_histogram(parsed, Task::kFourClass), label_histogram(records, Task::kFourClass));
  EXPECT_EQ(label_histogram(parsed, Task::kFourClass), (std::vector<std::size_t>{25, 25, 25, 25}));
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(parsed[i].x_body, records[i].x_body);
    EXPECT_EQ(parsed[i].y_answers, records[i].y_answers);
  }
}

TEST(ParseKu, EmbeddedTabsAndNewlinesSurvive) {
  TempDir dir("ku");
  auto records = synthetic_pairs(4, 1);
  records[0].x_body = "line one\nline\ttwo \\ three";
  write_ku_dataset(dir / "ku.tsv", records);
  EXPECT_EQ(parse_ku_dataset(dir / "ku.tsv")[0].x_body, records[0].x_body);
}

TEST(ParseAskUbuntu, TablePairs) {
  TempDir dir("au");
  const std::string text =
      "a1\tWhere can I find the source code of Ubuntu?\tI would like to know where to find the source code of "
      "Ubuntu 12.04. I'd like to see how far it is \"open source\".\tHow can I know which is the source of an "
      "specific standard shared libraries?\tHow can I get access to the source code of standard shared "
      "libraries?\tduplicate\n"
      "a2\tGrafics on Thinkpad R50e\tAfter installing Ubuntu 12.04 LTS on a Thinkpad R50e, there is no graphics "
      "driver, seems to me.\tHow to share files between Windows7(Guest) and Ubuntu 12.04(Host)?\tI searched on the "
      "internet but all issues have Ubuntu as the Guest.\tnon-duplicate\n";
  write_file(dir / "au.tsv", text);
  const auto records = parse_askubuntu(dir / "au.tsv");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].label, label_index(Task::kBinary, "duplicate"));
  EXPECT_EQ(records[1].label, label_index(Task::kBinary, "non-duplicate"));
  EXPECT_TRUE(records[0].x_answers.empty());
  EXPECT_TRUE(records[1].y_answers.empty());
  EXPECT_EQ(records[1].x_title, "Grafics on Thinkpad R50e");
}

TEST(ParseAskUbuntu, MalformedRowIsPositioned) {
  TempDir dir("au");
  write_file(dir / "au.tsv", "a1\tt\tb\tt2\tb2\tduplicate\na2\tonly\tthree\n");
  try {
    parse_askubuntu(dir / "au.tsv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseAskUbuntu, FourClassLabelRejected) {
  TempDir dir("au");
  write_file(dir / "au.tsv", "a1\tt\tb\tt2\tb2\tdirect\n");
  EXPECT_THROW(parse_askubuntu(dir / "au.tsv"), ParseError);
}

TEST(Cache, RoundTrip) {
  TempDir dir("cache");
  const auto pairs = tokenize_records(synthetic_pairs(12, 2), kDefaultMaxLen);
  write_cache(dir / "c.cache", Task::kFourClass, pairs, "asim test");
  ASSERT_TRUE(is_cache_file(dir / "c.cache"));
  Task task = Task::kBinary;
  const auto back = read_cache(dir / "c.cache", &task);
  EXPECT_EQ(task, Task::kFourClass);
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].pair_id, pairs[i].pair_id);
    EXPECT_EQ(back[i].x_tokens, pairs[i].x_tokens);
    EXPECT_EQ(back[i].y_tokens, pairs[i].y_tokens);
    EXPECT_EQ(back[i].label, pairs[i].label);
  }
}

TEST(Labels, Sets) {
  EXPECT_EQ(num_classes(Task::kFourClass), 4u);
  EXPECT_EQ(num_classes(Task::kBinary), 2u);
  EXPECT_EQ(label_index(Task::kFourClass, "indirect"), 2);
  EXPECT_EQ(label_index(Task::kFourClass, "non-duplicate"), -1);
  EXPECT_EQ(parse_task(task_name(Task::kBinary)), Task::kBinary);
}
