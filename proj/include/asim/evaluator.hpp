#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asim/dataset.hpp"
#include "asim/model.hpp"

namespace asim {

/// c×c counts; rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::uint64_t> counts;

  explicit ConfusionMatrix(std::size_t c = 0) : classes(c), counts(c * c, 0) {}
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes + pred]; }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * classes + pred]; }
  std::uint64_t total() const;
  std::uint64_t correct() const;
  void merge(const ConfusionMatrix& other);
};

/// Throws UsageError on length mismatch and DataError on out-of-range classes.
ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, std::size_t classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;    // true instances
  std::uint64_t predicted = 0;  // predicted instances
  bool precision_undefined = false;  // no predictions of this class
  bool recall_undefined = false;     // no instances of this class
};

struct EvalReport {
  std::vector<std::string> labels;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix matrix;
};

/// Per-class, macro and micro metrics. Vanishing denominators give 0 and set
/// the class flags. Throws UsageError on an empty matrix.
EvalReport metrics(const ConfusionMatrix& cm, std::span<const std::string_view> labels = {});

/// JSON object with every metric and the matrix. `provenance` lands in a
/// top-level "provenance" field when non-empty.
std::string report_json(const EvalReport& report, std::string_view provenance = {});
/// Aligned table: one row per class, then the averaged rows.
std::string report_text(const EvalReport& report);

/// Arg-max class of eval-mode forwards.
std::vector<int> predict_labels(const AsimModel& model, std::span<const EncodedPair> pairs);

/// Throws ConfigError when the model's class count does not match the task.
EvalReport evaluate(const AsimModel& model, std::span<const EncodedPair> pairs, Task task);

}  // namespace asim
