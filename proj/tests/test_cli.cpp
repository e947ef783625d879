#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <regex>

#include "asim/model.hpp"
#include "json.hpp"
#include "test_util.hpp"

using asim::testing::read_file;
using asim::testing::TempDir;
using asim::testing::write_file;

namespace {

struct RunResult {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(ASIM_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.output.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string match(const std::string& text, const std::string& pattern) {
  std::smatch m;
  return std::regex_search(text, m, std::regex(pattern)) ? m[1].str() : std::string();
}

const char* kToyModel = " --hidden 4 --prediction-hidden 8 --batch-size 8 ";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(run("synth --pairs 24 --seed 1 --out " + quoted(dir_ / "train.tsv")).status, 0);
    ASSERT_EQ(run("synth --pairs 12 --seed 2 --out " + quoted(dir_ / "val.tsv")).status, 0);
  }
  RunResult train(const std::string& out, const std::string& extra = "") {
    return run("train --train " + quoted(dir_ / "train.tsv") + " --val " + quoted(dir_ / "val.tsv") + " --out " +
               quoted(dir_ / out) + kToyModel +
               (extra.find("--embed-dim") == std::string::npos ? " --embed-dim 8 " : " ") + extra);
  }
  TempDir dir_{"cli"};
};

}  // namespace

TEST_F(Cli, VersionAndHelp) {
  const auto v = run("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_NE(v.output.find(std::string(asim::kToolVersion)), std::string::npos);
  EXPECT_EQ(run("train --help").status, 0);
}

TEST_F(Cli, MissingInputFileFails) {
  const auto r = run("preprocess --input " + quoted(dir_ / "nope.tsv") + " --vocab-out " + quoted(dir_ / "v") +
                     " --cache-out " + quoted(dir_ / "c"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos);
}

TEST_F(Cli, BadLabelRowReportsLine) {
  std::string text = read_file(dir_ / "train.tsv");
  text += "bad1\tq1\tTitle\tbody\tnull\tq2\tTitle two\tbody\tnull\trelated\n";
  write_file(dir_ / "bad.tsv", text);
  const auto r = run("preprocess --input " + quoted(dir_ / "bad.tsv") + " --vocab-out " + quoted(dir_ / "v") +
                     " --cache-out " + quoted(dir_ / "c"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find(":26:"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("related"), std::string::npos) << r.output;
}

TEST_F(Cli, PreprocessWritesCacheAndVocab) {
  const auto r = run("preprocess --input " + quoted(dir_ / "train.tsv") + " --vocab-out " + quoted(dir_ / "v.txt") +
                     " --cache-out " + quoted(dir_ / "c.cache"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("records: 24"), std::string::npos);
  EXPECT_TRUE(asim::is_cache_file(dir_ / "c.cache"));
  EXPECT_GT(asim::Vocabulary::load(dir_ / "v.txt").size(), 2u);
}

TEST_F(Cli, ZeroEpochsWritesInitializationCheckpoint) {
  const auto r = train("run0", "--epochs 0");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("no epochs trained"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "run0" / "best.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "run0" / "config.txt"));
}

TEST_F(Cli, AblateFlagsLandInCheckpoint) {
  ASSERT_EQ(train("abl", "--epochs 0 --ablate fl,sc").status, 0);
  const auto model = asim::AsimModel::load(dir_ / "abl" / "best.ckpt");
  EXPECT_TRUE(model.config().use_attention);
  EXPECT_FALSE(model.config().use_fusion);
  EXPECT_FALSE(model.config().use_shortcuts);
  EXPECT_EQ(train("bad", "--epochs 0 --ablate nope").status, 1);
}

TEST_F(Cli, ConfigFileWithCommandLinePrecedence) {
  write_file(dir_ / "cfg.ini", "# toy\nepochs = 0\nhidden=3\nseed=9\n");
  const auto r = train("cfg", "--config " + quoted(dir_ / "cfg.ini") + " --seed 4");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("seed=4"), std::string::npos);
  EXPECT_NE(r.output.find("epochs=0"), std::string::npos);
  EXPECT_EQ(asim::AsimModel::load(dir_ / "cfg" / "best.ckpt").config().hidden, 4u);  // --hidden 4 in kToyModel
}

TEST_F(Cli, TrainEvalPredictExport) {
  const auto t = train("run", "--epochs 1");
  ASSERT_EQ(t.status, 0) << t.output;
  EXPECT_FALSE(match(t.output, "epoch1_loss (\\S+)").empty());
  const auto ckpt = quoted(dir_ / "run" / "best.ckpt");

  const auto e = run("eval --checkpoint " + ckpt + " --data " + quoted(dir_ / "val.tsv") + " --out " +
                     quoted(dir_ / "eval"));
  ASSERT_EQ(e.status, 0) << e.output;
  const auto report = nlohmann::json::parse(read_file(dir_ / "eval" / "report.json"));
  EXPECT_EQ(report["total"], 12);
  EXPECT_EQ(report["per_class"].size(), 4u);
  EXPECT_NE(report["provenance"].get<std::string>().find("checkpoint="), std::string::npos);
  EXPECT_EQ(report["micro_f1"], report["accuracy"]);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "eval" / "report.txt"));

  const auto records = asim::parse_ku_dataset(dir_ / "val.tsv");
  const auto p = run("predict --checkpoint " + ckpt + " --x-title '" + records[0].x_title + "' --y-title '" +
                     records[0].y_title + "'");
  ASSERT_EQ(p.status, 0) << p.output;
  EXPECT_NE(p.output.find("prediction "), std::string::npos);

  const auto empty = run("predict --checkpoint " + ckpt + " --x-title 'the of and' --y-title '" +
                         records[0].y_title + "'");
  EXPECT_EQ(empty.status, 1);
  EXPECT_NE(empty.output.find("empty"), std::string::npos);

  const auto x = run("export-attention --checkpoint " + ckpt + " --data " + quoted(dir_ / "val.tsv") +
                     " --pair-id " + records[1].pair_id + " --out " + quoted(dir_ / "att" / "pair"));
  ASSERT_EQ(x.status, 0) << x.output;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "att" / "pair.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "att" / "pair.svg"));
}

TEST_F(Cli, FourClassCheckpointOnBinarySplitFails) {
  ASSERT_EQ(train("run4", "--epochs 0").status, 0);
  ASSERT_EQ(run("synth --pairs 8 --task binary --out " + quoted(dir_ / "bin.tsv")).status, 0);
  const auto r = run("eval --checkpoint " + quoted(dir_ / "run4" / "best.ckpt") + " --task binary --data " +
                     quoted(dir_ / "bin.tsv"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("classes"), std::string::npos) << r.output;
}

TEST_F(Cli, BinaryTaskTrainsTwoClassModel) {
  ASSERT_EQ(run("synth --pairs 16 --task binary --out " + quoted(dir_ / "bin.tsv")).status, 0);
  const auto r = run("train --task binary --train " + quoted(dir_ / "bin.tsv") + " --val " + quoted(dir_ / "bin.tsv") +
                     " --out " + quoted(dir_ / "bin") + kToyModel + " --embed-dim 8 --epochs 1");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(asim::AsimModel::load(dir_ / "bin" / "best.ckpt").config().num_classes, 2u);
  const auto e = run("eval --task binary --checkpoint " + quoted(dir_ / "bin" / "best.ckpt") + " --data " +
                     quoted(dir_ / "bin.tsv"));
  EXPECT_EQ(e.status, 0);
  EXPECT_NE(e.output.find("headline accuracy"), std::string::npos);
}

TEST_F(Cli, TrainingIsDeterministic) {
  const auto a = train("da", "--epochs 1 --seed 5"), b = train("db", "--epochs 1 --seed 5");
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  EXPECT_EQ(match(a.output, "epoch1_loss (\\S+)"), match(b.output, "epoch1_loss (\\S+)"));
  EXPECT_EQ(read_file(dir_ / "da" / "last.ckpt"), read_file(dir_ / "db" / "last.ckpt"));
}

TEST_F(Cli, EmbeddingPipeline) {
  ASSERT_EQ(run("synth --corpus-tokens 1000 --out " + quoted(dir_ / "corpus.txt")).status, 0);
  ASSERT_EQ(run("embed build-vocab --corpus " + quoted(dir_ / "corpus.txt") + " --out " + quoted(dir_ / "ev.txt"))
                .status,
            0);
  ASSERT_EQ(run("embed cooccur --corpus " + quoted(dir_ / "corpus.txt") + " --vocab " + quoted(dir_ / "ev.txt") +
                " --out " + quoted(dir_ / "co.bin"))
                .status,
            0);
  const auto g = run("embed train --cooccur " + quoted(dir_ / "co.bin") + " --vocab " + quoted(dir_ / "ev.txt") +
                     " --dim 8 --epochs 3 --out " + quoted(dir_ / "vec.txt"));
  ASSERT_EQ(g.status, 0) << g.output;
  const auto word = asim::Vocabulary::load(dir_ / "ev.txt").token(2);
  const auto i = run("embed inspect --embeddings " + quoted(dir_ / "vec.txt") + " --query " + word + " --k 3");
  EXPECT_EQ(i.status, 0);
  const auto oov = run("embed inspect --embeddings " + quoted(dir_ / "vec.txt") + " --query zzzzqq");
  EXPECT_EQ(oov.status, 0);
  EXPECT_NE(oov.output.find("out of vocabulary"), std::string::npos);

  const auto t = train("emb", "--epochs 0 --embed-dim 8 --embeddings " + quoted(dir_ / "vec.txt"));
  EXPECT_EQ(t.status, 0) << t.output;
  EXPECT_NE(t.output.find("embedding coverage"), std::string::npos);
  EXPECT_EQ(train("embbad", "--epochs 0 --embed-dim 9 --embeddings " + quoted(dir_ / "vec.txt")).status, 1);
}

TEST_F(Cli, DivergenceExitsWithTwo) {
  const auto r = train("div", "--epochs 3 --lr 1e300");
  EXPECT_EQ(r.status, 2) << r.output;
  EXPECT_NE(r.output.find("last.ckpt"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "div" / "last.ckpt"));
}

TEST_F(Cli, UnknownOptionRejected) { EXPECT_NE(run("train --bogus 1").status, 0); }
