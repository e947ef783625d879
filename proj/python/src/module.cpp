#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "asim/dataset.hpp"
#include "asim/embeddings.hpp"
#include "asim/errors.hpp"
#include "asim/evaluator.hpp"
#include "asim/model.hpp"
#include "asim/synth.hpp"
#include "asim/text.hpp"
#include "asim/trainer.hpp"
#include "asim/vocab.hpp"

namespace py = pybind11;
using namespace asim;

namespace {

std::vector<EncodedPair> to_pairs(const std::vector<std::tuple<std::vector<int>, std::vector<int>, int>>& rows) {
  std::vector<EncodedPair> out;
  out.reserve(rows.size());
  for (const auto& [x, y, label] : rows) out.push_back({x, y, label});
  return out;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["labels"] = r.labels;
  d["total"] = r.matrix.total();
  d["accuracy"] = r.accuracy;
  d["micro_f1"] = r.micro_f1;
  d["macro_precision"] = r.macro_precision;
  d["macro_recall"] = r.macro_recall;
  d["macro_f1"] = r.macro_f1;
  py::list per_class;
  for (const auto& m : r.per_class) {
    py::dict c;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["support"] = m.support;
    per_class.append(c);
  }
  d["per_class"] = per_class;
  std::vector<std::vector<std::uint64_t>> matrix(r.matrix.classes);
  for (std::size_t t = 0; t < r.matrix.classes; ++t)
    for (std::size_t p = 0; p < r.matrix.classes; ++p) matrix[t].push_back(r.matrix.at(t, p));
  d["confusion_matrix"] = matrix;
  return d;
}

std::vector<std::vector<double>> rows_of(const Tensor& t) {
  std::vector<std::vector<double>> out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out[r].push_back(t.at(r, c));
  return out;
}

}  // namespace

PYBIND11_MODULE(_asim, m) {
  m.doc() = "Attention-based sentence-pair interaction model for knowledge-unit relatedness";
  m.attr("__version__") = std::string(kToolVersion.substr(5));

  py::register_exception<Error>(m, "AsimError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("clean_text", &clean_text, py::arg("raw"), py::arg("strip_code") = true);
  m.def("tokenize", &tokenize, py::arg("cleaned"));
  m.def("porter_stem", &porter_stem, py::arg("word"));
  m.def("is_stop_word", &is_stop_word, py::arg("token"));
  m.def(
      "unit_tokens",
      [](const std::string& title, const std::string& body, const std::string& answers, std::size_t max_len) {
        auto tokens = unit_tokens(title, body, answers);
        if (tokens.size() > max_len) tokens.resize(max_len);
        return tokens;
      },
      py::arg("title"), py::arg("body") = "", py::arg("answers") = "", py::arg("max_len") = kDefaultMaxLen);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static(
          "build",
          [](const std::vector<std::vector<std::string>>& corpus, std::size_t min_count) {
            return build_vocab(corpus, min_count);
          },
          py::arg("corpus"), py::arg("min_count") = 1)
      .def_static("load", [](const std::string& path) { return Vocabulary::load(path); })
      .def("save", [](const Vocabulary& v, const std::string& path) { v.save(path); })
      .def("__len__", &Vocabulary::size)
      .def("id", &Vocabulary::id)
      .def("token", &Vocabulary::token)
      .def("encode", [](const Vocabulary& v, const std::vector<std::string>& tokens) { return v.encode(tokens); })
      .def("__contains__", &Vocabulary::contains);

  py::class_<AsimConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("embed_dim", &AsimConfig::embed_dim)
      .def_readwrite("hidden", &AsimConfig::hidden)
      .def_readwrite("num_classes", &AsimConfig::num_classes)
      .def_readwrite("max_len", &AsimConfig::max_len)
      .def_readwrite("dropout", &AsimConfig::dropout)
      .def_readwrite("prediction_hidden_dims", &AsimConfig::prediction_hidden_dims)
      .def_readwrite("use_attention", &AsimConfig::use_attention)
      .def_readwrite("use_fusion", &AsimConfig::use_fusion)
      .def_readwrite("use_shortcuts", &AsimConfig::use_shortcuts)
      .def_readwrite("train_embeddings", &AsimConfig::train_embeddings)
      .def("to_text", &AsimConfig::to_text);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<AsimModel>(m, "Model")
      .def(py::init([](const AsimConfig& cfg, const Vocabulary& vocab, std::uint64_t seed) {
             return AsimModel(cfg, vocab, random_table(vocab, cfg.embed_dim, seed), seed);
           }),
           py::arg("config"), py::arg("vocab"), py::arg("seed") = 1)
      .def_static("load", [](const std::string& path) { return AsimModel::load(path); })
      .def("save", [](const AsimModel& model, const std::string& path) { model.save(path); })
      .def_property_readonly("config", &AsimModel::config)
      .def_property_readonly("vocab", &AsimModel::vocab)
      .def(
          "predict_proba",
          [](const AsimModel& model, const std::vector<int>& x, const std::vector<int>& y) {
            return model.forward(x, y, Mode::kEval).probs;
          },
          py::arg("x_ids"), py::arg("y_ids"))
      .def(
          "attention",
          [](const AsimModel& model, const std::vector<int>& x, const std::vector<int>& y) {
            if (!model.config().use_attention) throw ConfigError("the model has no attention layer");
            return rows_of(model.forward(x, y, Mode::kEval).weights_x);
          },
          py::arg("x_ids"), py::arg("y_ids"));

  m.def(
      "train",
      [](const AsimModel& model, const std::vector<std::tuple<std::vector<int>, std::vector<int>, int>>& train_rows,
         const std::vector<std::tuple<std::vector<int>, std::vector<int>, int>>& val_rows, const TrainConfig& cfg) {
        const auto tr = to_pairs(train_rows);
        const auto va = to_pairs(val_rows);
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = train(model.clone(), tr, va, cfg);
        }
        py::list log;
        for (const auto& e : result.log) log.append(py::make_tuple(e.epoch, e.train_loss, e.val_micro_f1));
        return py::make_tuple(result.best_model(), log);
      },
      py::arg("model"), py::arg("train_pairs"), py::arg("val_pairs"), py::arg("config"),
      "Trains a copy of `model`; returns (best-validation model, [(epoch, loss, val_micro_f1)]).");

  m.def(
      "evaluate",
      [](const AsimModel& model, const std::vector<std::tuple<std::vector<int>, std::vector<int>, int>>& rows) {
        const Task task = model.config().num_classes == 2 ? Task::kBinary : Task::kFourClass;
        return report_dict(evaluate(model, to_pairs(rows), task));
      },
      py::arg("model"), py::arg("pairs"));

  m.def(
      "metrics",
      [](const std::vector<int>& preds, const std::vector<int>& labels, std::size_t classes) {
        return report_dict(metrics(confusion(preds, labels, classes)));
      },
      py::arg("preds"), py::arg("labels"), py::arg("classes"));

  m.def(
      "synthetic_pairs",
      [](std::size_t n, std::uint64_t seed) {
        py::list out;
        for (const auto& r : synthetic_pairs(n, seed)) {
          py::dict d;
          d["pair_id"] = r.pair_id;
          d["x_title"] = r.x_title;
          d["x_body"] = r.x_body;
          d["x_answers"] = r.x_answers;
          d["y_title"] = r.y_title;
          d["y_body"] = r.y_body;
          d["y_answers"] = r.y_answers;
          d["label"] = r.label;
          out.append(d);
        }
        return out;
      },
      py::arg("n_pairs"), py::arg("seed") = 1);
}
