#include <gtest/gtest.h>

#include "json.hpp"
#include <algorithm>
#include <numeric>
#include <random>

#include "asim/embeddings.hpp"
#include "asim/errors.hpp"
#include "asim/evaluator.hpp"
#include "test_util.hpp"

using namespace asim;

namespace {

ConfusionMatrix matrix(std::size_t c, std::initializer_list<std::uint64_t> counts) {
  ConfusionMatrix cm(c);
  cm.counts.assign(counts.begin(), counts.end());
  return cm;
}

// Per-class and averaged metrics written out directly from the definitions.
struct Reference {
  std::vector<double> precision, recall, f1;
  double macro_p = 0, macro_r = 0, macro_f1 = 0, accuracy = 0;
};

Reference reference_metrics(const ConfusionMatrix& cm) {
  Reference ref;
  const std::size_t c = cm.classes;
  double total = 0, diag = 0;
  for (std::size_t i = 0; i < c; ++i) {
    double row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += static_cast<double>(cm.at(i, j));
      col += static_cast<double>(cm.at(j, i));
      total += static_cast<double>(cm.at(i, j));
    }
    const double tp = static_cast<double>(cm.at(i, i));
    diag += tp;
    const double p = col > 0 ? tp / col : 0.0;
    const double r = row > 0 ? tp / row : 0.0;
    ref.precision.push_back(p);
    ref.recall.push_back(r);
    ref.f1.push_back(p + r > 0 ? 2 * p * r / (p + r) : 0.0);
  }
  for (std::size_t i = 0; i < c; ++i) {
    ref.macro_p += ref.precision[i] / static_cast<double>(c);
    ref.macro_r += ref.recall[i] / static_cast<double>(c);
    ref.macro_f1 += ref.f1[i] / static_cast<double>(c);
  }
  ref.accuracy = diag / total;
  return ref;
}

}  // namespace

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  const std::vector<int> labels{0, 1, 2, 3, 1, 2};
  const ConfusionMatrix cm = confusion(labels, labels, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) EXPECT_EQ(cm.at(i, j), 0u);
  EXPECT_EQ(cm.correct(), 6u);
  EXPECT_EQ(cm.total(), 6u);
}

TEST(Confusion, AllPredictedZeroFillsOneColumn) {
  const std::vector<int> preds(5, 0), labels{0, 1, 2, 3, 3};
  const ConfusionMatrix cm = confusion(preds, labels, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(cm.at(i, j), 0u);
  EXPECT_EQ(cm.at(3, 0), 2u);
}

TEST(Confusion, EmptyInputGivesZeroMatrix) {
  const std::vector<int> none;
  const ConfusionMatrix cm = confusion(none, none, 4);
  EXPECT_EQ(cm.counts, std::vector<std::uint64_t>(16, 0));
}

TEST(Confusion, Errors) {
  const std::vector<int> a{0, 1}, b{0};
  EXPECT_THROW(confusion(a, b, 2), UsageError);
  const std::vector<int> bad{0, 4};
  EXPECT_THROW(confusion(bad, a, 4), DataError);
}

TEST(Metrics, DiagonalIsPerfect) {
  const EvalReport r = metrics(matrix(3, {4, 0, 0, 0, 2, 0, 0, 0, 7}));
  EXPECT_EQ(r.micro_f1, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.macro_precision, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(Metrics, TwoClassHandComputation) {
  const EvalReport r = metrics(matrix(2, {3, 1, 2, 4}));
  EXPECT_NEAR(r.per_class[0].precision, 0.6, 1e-15);
  EXPECT_NEAR(r.per_class[0].recall, 0.75, 1e-15);
  EXPECT_NEAR(r.per_class[0].f1, 2 * 0.6 * 0.75 / 1.35, 1e-15);
  EXPECT_NEAR(r.per_class[0].f1, 0.6667, 1e-4);
  EXPECT_DOUBLE_EQ(r.micro_f1, 0.7);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
}

TEST(Metrics, EmptyClassIsZeroAndFlagged) {
  const EvalReport r = metrics(matrix(3, {2, 1, 0, 1, 3, 0, 0, 0, 0}));
  EXPECT_EQ(r.per_class[2].precision, 0.0);
  EXPECT_EQ(r.per_class[2].recall, 0.0);
  EXPECT_EQ(r.per_class[2].f1, 0.0);
  EXPECT_TRUE(r.per_class[2].precision_undefined);
  EXPECT_TRUE(r.per_class[2].recall_undefined);
  EXPECT_FALSE(r.per_class[0].precision_undefined);
  EXPECT_NE(report_text(r).find('*'), std::string::npos);
}

TEST(Metrics, EmptyMatrixRejected) { EXPECT_THROW(metrics(ConfusionMatrix(4)), UsageError); }

TEST(Metrics, RandomMatricesMatchReference) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = trial % 2 ? 4 : 2;
    ConfusionMatrix cm(c);
    for (auto& n : cm.counts) n = rng() % (trial % 5 == 0 ? 3 : 40);
    if (cm.total() == 0) cm.at(0, 0) = 1;
    const EvalReport r = metrics(cm);
    const Reference ref = reference_metrics(cm);
    for (std::size_t i = 0; i < c; ++i) {
      EXPECT_EQ(r.per_class[i].precision, ref.precision[i]);
      EXPECT_EQ(r.per_class[i].recall, ref.recall[i]);
      EXPECT_NEAR(r.per_class[i].f1, ref.f1[i], 1e-12);
    }
    EXPECT_NEAR(r.macro_precision, ref.macro_p, 1e-12);
    EXPECT_NEAR(r.macro_recall, ref.macro_r, 1e-12);
    EXPECT_NEAR(r.macro_f1, ref.macro_f1, 1e-12);
    EXPECT_EQ(r.accuracy, ref.accuracy);
    EXPECT_EQ(r.micro_f1, r.accuracy);
  }
}

TEST(Metrics, MicroF1EqualsMeanAgreement) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> p(1 + rng() % 60), l(p.size());
    std::size_t agree = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = static_cast<int>(rng() % 4);
      l[i] = static_cast<int>(rng() % 4);
      agree += p[i] == l[i];
    }
    EXPECT_EQ(metrics(confusion(p, l, 4)).micro_f1, static_cast<double>(agree) / static_cast<double>(p.size()));
  }
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 rng(19);
  std::vector<int> p(50), l(50);
  for (std::size_t i = 0; i < 50; ++i) {
    p[i] = static_cast<int>(rng() % 4);
    l[i] = static_cast<int>(rng() % 4);
  }
  const EvalReport a = metrics(confusion(p, l, 4));
  std::vector<std::size_t> order(50);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> ps, ls;
  for (auto i : order) {
    ps.push_back(p[i]);
    ls.push_back(l[i]);
  }
  const EvalReport b = metrics(confusion(ps, ls, 4));
  EXPECT_EQ(a.matrix.counts, b.matrix.counts);
  EXPECT_EQ(a.macro_f1, b.macro_f1);
  EXPECT_EQ(a.micro_f1, b.micro_f1);
}

TEST(Report, JsonSchema) {
  const auto labels = label_names(Task::kFourClass);
  const EvalReport r = metrics(matrix(4, {5, 1, 0, 0, 0, 4, 1, 0, 1, 0, 3, 2, 0, 0, 1, 6}), labels);
  const auto j = nlohmann::json::parse(report_json(r, "asim 0.1.0 test"));
  EXPECT_EQ(j["provenance"], "asim 0.1.0 test");
  EXPECT_EQ(j["total"], 24);
  EXPECT_DOUBLE_EQ(j["micro_f1"].get<double>(), 18.0 / 24.0);
  ASSERT_EQ(j["per_class"].size(), 4u);
  EXPECT_EQ(j["per_class"][0]["label"], "duplicate");
  EXPECT_EQ(j["confusion_matrix"].size(), 4u);
  EXPECT_EQ(j["confusion_matrix"][2][3], 2);
  for (const char* key : {"accuracy", "macro_precision", "macro_recall", "macro_f1", "micro_precision", "micro_recall"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Evaluate, UntrainedModelIsNearChanceOnBalancedSplit) {
  const auto data = asim::testing::toy_data(400, 21);
  AsimConfig cfg;
  cfg.embed_dim = 12;
  cfg.hidden = 6;
  cfg.prediction_hidden_dims = {8};
  const AsimModel model(cfg, data.vocab, random_table(data.vocab, 12, 3), 4);
  const EvalReport r = evaluate(model, data.pairs, Task::kFourClass);
  EXPECT_NEAR(r.micro_f1, 0.25, 0.05);
  EXPECT_EQ(r.matrix.total(), 400u);
}

TEST(Evaluate, ClassCountMismatch) {
  const auto data = asim::testing::toy_data(8, 22);
  AsimConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden = 2;
  cfg.prediction_hidden_dims = {2};
  const AsimModel model(cfg, data.vocab, random_table(data.vocab, 4, 3), 4);
  EXPECT_THROW(evaluate(model, data.pairs, Task::kBinary), ConfigError);
}
