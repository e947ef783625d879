#include "asim/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "asim/errors.hpp"

namespace asim {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::correct() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < classes; ++i) t += at(i, i);
  return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes != classes) throw DimensionError("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, std::size_t classes) {
  if (preds.size() != labels.size()) {
    throw UsageError("confusion: " + std::to_string(preds.size()) + " predictions but " +
                     std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || labels[i] < 0 || static_cast<std::size_t>(preds[i]) >= classes ||
        static_cast<std::size_t>(labels[i]) >= classes) {
      throw DataError("confusion: class index out of range at position " + std::to_string(i));
    }
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

EvalReport metrics(const ConfusionMatrix& cm, std::span<const std::string_view> labels) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw UsageError("metrics: confusion matrix is empty");
  EvalReport r;
  r.matrix = cm;
  const std::size_t c = cm.classes;
  for (std::size_t i = 0; i < c; ++i) r.labels.push_back(i < labels.size() ? std::string(labels[i]) : std::to_string(i));
  r.per_class.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    auto& m = r.per_class[i];
    const double tp = static_cast<double>(cm.at(i, i));
    for (std::size_t j = 0; j < c; ++j) {
      m.support += cm.at(i, j);
      m.predicted += cm.at(j, i);
    }
    m.precision_undefined = m.predicted == 0;
    m.recall_undefined = m.support == 0;
    m.precision = m.predicted ? tp / static_cast<double>(m.predicted) : 0.0;
    m.recall = m.support ? tp / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  r.macro_precision /= static_cast<double>(c);
  r.macro_recall /= static_cast<double>(c);
  r.macro_f1 /= static_cast<double>(c);

  // Aggregated counts: every error is one FP and one FN.
  const double tp = static_cast<double>(cm.correct());
  const double errors = static_cast<double>(total - cm.correct());
  r.micro_precision = tp / (tp + errors);
  r.micro_recall = tp / (tp + errors);
  r.micro_f1 = 2.0 * tp / (2.0 * tp + errors + errors);
  r.accuracy = tp / static_cast<double>(total);
  return r;
}

std::string report_json(const EvalReport& report, std::string_view provenance) {
  nlohmann::ordered_json j;
  if (!provenance.empty()) j["provenance"] = provenance;
  j["labels"] = report.labels;
  j["total"] = report.matrix.total();
  j["accuracy"] = report.accuracy;
  j["micro_precision"] = report.micro_precision;
  j["micro_recall"] = report.micro_recall;
  j["micro_f1"] = report.micro_f1;
  j["macro_precision"] = report.macro_precision;
  j["macro_recall"] = report.macro_recall;
  j["macro_f1"] = report.macro_f1;
  auto& classes = j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.per_class.size(); ++i) {
    const auto& m = report.per_class[i];
    classes.push_back({{"label", report.labels[i]},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"predicted", m.predicted},
                       {"precision_undefined", m.precision_undefined},
                       {"recall_undefined", m.recall_undefined}});
  }
  auto& rows = j["confusion_matrix"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < report.matrix.classes; ++t) {
    std::vector<std::uint64_t> row(report.matrix.counts.begin() + t * report.matrix.classes,
                                   report.matrix.counts.begin() + (t + 1) * report.matrix.classes);
    rows.push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string report_text(const EvalReport& report) {
  std::size_t width = 13;
  for (const auto& l : report.labels) width = std::max(width, l.size() + 2);
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %8s\n", static_cast<int>(width), "class", "precision",
                "recall", "f1", "support");
  os << buf;
  for (std::size_t i = 0; i < report.per_class.size(); ++i) {
    const auto& m = report.per_class[i];
    std::string label = report.labels[i];
    if (m.precision_undefined || m.recall_undefined) label += "*";
    std::snprintf(buf, sizeof buf, "%-*s %10.4f %10.4f %10.4f %8llu\n", static_cast<int>(width), label.c_str(),
                  m.precision, m.recall, m.f1, static_cast<unsigned long long>(m.support));
    os << buf;
  }
  const auto total = static_cast<unsigned long long>(report.matrix.total());
  std::snprintf(buf, sizeof buf, "%-*s %10.4f %10.4f %10.4f %8llu\n", static_cast<int>(width), "macro",
                report.macro_precision, report.macro_recall, report.macro_f1, total);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-*s %10.4f %10.4f %10.4f %8llu\n", static_cast<int>(width), "micro",
                report.micro_precision, report.micro_recall, report.micro_f1, total);
  os << buf;
  std::snprintf(buf, sizeof buf, "accuracy %.4f\n", report.accuracy);
  os << buf;
  for (const auto& m : report.per_class) {
    if (m.precision_undefined || m.recall_undefined) {
      os << "* class with no predictions or no instances; undefined ratios reported as 0\n";
      break;
    }
  }
  return os.str();
}

std::vector<int> predict_labels(const AsimModel& model, std::span<const EncodedPair> pairs) {
  std::vector<int> preds;
  preds.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto trace = model.forward(p.x, p.y, Mode::kEval);
    preds.push_back(static_cast<int>(std::max_element(trace.probs.begin(), trace.probs.end()) - trace.probs.begin()));
  }
  return preds;
}

EvalReport evaluate(const AsimModel& model, std::span<const EncodedPair> pairs, Task task) {
  if (model.config().num_classes != num_classes(task)) {
    throw ConfigError("model predicts " + std::to_string(model.config().num_classes) + " classes but task '" +
                      std::string(task_name(task)) + "' has " + std::to_string(num_classes(task)));
  }
  const auto preds = predict_labels(model, pairs);
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label);
  return metrics(confusion(preds, labels, num_classes(task)), label_names(task));
}

}  // namespace asim
