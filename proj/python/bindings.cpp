#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sersem/error.hpp"
#include "sersem/evaluation.hpp"
#include "sersem/mask.hpp"
#include "sersem/pipeline.hpp"
#include "sersem/projection.hpp"
#include "sersem/scoring.hpp"

namespace py = pybind11;
using namespace sersem;

namespace {

Language language_arg(const std::string& name) {
  const auto language = parse_language(name);
  if (!language) throw InvalidArgument("unsupported language: " + name);
  return *language;
}

std::vector<TokenRecord> records_from(const std::vector<double>& z,
                                      const std::vector<double>& logprob) {
  if (!logprob.empty() && logprob.size() != z.size()) {
    throw InvalidArgument("z and logprob differ in length");
  }
  std::vector<TokenRecord> records(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    records[i].index = i + 1;
    records[i].z = z[i];
    records[i].logprob = logprob.empty() ? 0.0 : logprob[i];
  }
  return records;
}

std::vector<TokenRecord> logprob_records(const std::vector<double>& logprob) {
  std::vector<TokenRecord> records(logprob.size());
  for (std::size_t i = 0; i < logprob.size(); ++i) records[i].logprob = logprob[i];
  return records;
}

std::vector<TokenSpan> token_spans(const std::vector<std::pair<std::size_t, std::size_t>>& tokens) {
  std::vector<TokenSpan> spans;
  spans.reserve(tokens.size());
  for (const auto& [start, end] : tokens) spans.push_back({spans.size(), start, end});
  return spans;
}

RunContext context(std::uint64_t seed, std::size_t workers) {
  RunContext ctx;
  ctx.seed = seed;
  ctx.workers = workers;
  ctx.warn = [](const std::string& message) {
    py::gil_scoped_acquire gil;
    PyErr_WarnEx(PyExc_RuntimeWarning, message.c_str(), 1);
  };
  return ctx;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Structure-aware membership inference over source code (C++ core)";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<Wordlist>(m, "Wordlist")
      .def_static("load", &Wordlist::load, py::arg("path"))
      .def_static("from_words",
                  [](const std::vector<std::string>& words) { return Wordlist::from_words(words); })
      .def("__contains__", &Wordlist::contains)
      .def("__len__", &Wordlist::size);
  m.def("default_wordlist_path", &default_wordlist_path);

  py::class_<CharWeightMask>(m, "CharWeightMask")
      .def_readonly("sample_id", &CharWeightMask::sample_id)
      .def_readonly("length", &CharWeightMask::length)
      .def_readonly("degraded", &CharWeightMask::degraded)
      .def_property_readonly("spans",
                             [](const CharWeightMask& mask) {
                               std::vector<std::tuple<std::size_t, std::size_t, double>> out;
                               for (const WeightRun& r : mask.spans) out.emplace_back(r.start, r.end, r.weight);
                               return out;
                             })
      .def("weights", &CharWeightMask::materialize);

  py::class_<MaskEngine>(m, "MaskBuilder")
      .def(py::init<const Wordlist&>(), py::keep_alive<1, 2>(), py::arg("wordlist"))
      .def(
          "build",
          [](MaskEngine& engine, const std::string& sample_id, const std::string& language,
             const std::string& content) {
            return engine.build({sample_id, language_arg(language), content, std::nullopt});
          },
          py::arg("sample_id"), py::arg("language"), py::arg("content"));

  m.def(
      "lint_format",
      [](const std::string& content) {
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
        for (const LintDiagnostic& d : lint_format(Utf8Text(content))) {
          out.emplace_back(d.start, d.end, std::string(to_string(d.rule)));
        }
        return out;
      },
      py::arg("content"));
  m.def("split_identifier", &split_identifier, py::arg("identifier"));
  m.def("dictionary_check", &dictionary_check, py::arg("identifier"), py::arg("wordlist"));

  m.def(
      "zscore",
      [](const std::vector<double>& logits, std::size_t correct) {
        const ZScore z = zscore(std::span<const double>(logits), correct);
        return std::make_pair(z.value, z.degenerate);
      },
      py::arg("logits"), py::arg("correct_index"));
  m.def(
      "project",
      [](const std::vector<double>& char_weights,
         const std::vector<std::pair<std::size_t, std::size_t>>& tokens) {
        const TokenWeights w = project(char_weights, token_spans(tokens));
        return std::make_pair(w.raw, w.normalized);
      },
      py::arg("char_weights"), py::arg("tokens"));
  m.def(
      "anomaly_score",
      [](const std::vector<double>& z, const std::vector<double>& token_weights) {
        TokenWeights w;
        w.raw = token_weights;
        return anomaly_score(records_from(z, {}), w);
      },
      py::arg("z"), py::arg("token_weights"),
      "z covers positions 1..n-1 of the n tokens weighted by token_weights.");
  m.def("sigmoid", &sigmoid, py::arg("x"));
  m.def(
      "loss_score", [](const std::vector<double>& lp) { return loss_score(logprob_records(lp)); },
      py::arg("logprob"));
  m.def(
      "mink_score",
      [](const std::vector<double>& lp, double k) { return mink_score(logprob_records(lp), k); },
      py::arg("logprob"), py::arg("k_percent") = 20.0);
  m.def("fuse", &fuse, py::arg("anomaly"), py::arg("probe"), py::arg("alpha") = 0.5);
  m.def(
      "auc_roc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return auc_roc(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "run_mask",
      [](const Path& manifest, const Path& out, std::optional<Path> lints,
         std::optional<Path> wordlist, std::size_t workers) {
        MaskSummary s;
        {
          py::gil_scoped_release release;
          s = cmd_mask({manifest, out, lints, wordlist}, context(0, workers));
        }
        return py::make_tuple(s.samples, s.degraded);
      },
      py::arg("manifest"), py::arg("out"), py::arg("lints") = py::none(),
      py::arg("wordlist") = py::none(), py::arg("workers") = 1,
      "Returns (samples, degraded).");
  m.def(
      "run_score",
      [](const Path& manifest, const Path& masks, const Path& tokens, const Path& out,
         double k_percent, std::size_t workers) {
        ScoreSummary s;
        {
          py::gil_scoped_release release;
          s = cmd_score({manifest, masks, tokens, out, k_percent}, context(0, workers));
        }
        return py::make_tuple(s.samples, s.incomplete);
      },
      py::arg("manifest"), py::arg("masks"), py::arg("tokens"), py::arg("out"),
      py::arg("k_percent") = 20.0, py::arg("workers") = 1, "Returns (samples, incomplete).");
  m.def(
      "run_train_probes",
      [](const Path& features, const Path& manifest, const Path& out, std::uint64_t seed,
         std::size_t epochs, std::size_t hidden_dim, std::size_t workers) {
        py::gil_scoped_release release;
        TrainOptions o{features, manifest, out, std::nullopt, {}};
        o.config.epochs = epochs;
        o.config.hidden_dim = hidden_dim;
        return cmd_train_probes(o, context(seed, workers)).chosen;
      },
      py::arg("features"), py::arg("manifest"), py::arg("out"), py::arg("seed") = 0,
      py::arg("epochs") = 30, py::arg("hidden_dim") = 128, py::arg("workers") = 1,
      "Returns the ensemble's layers.");
  m.def(
      "run_infer",
      [](const Path& features, const Path& bundle, const Path& scores, const Path& out,
         double alpha, std::size_t workers) {
        py::gil_scoped_release release;
        return cmd_infer({features, bundle, scores, out, alpha}, context(0, workers)).samples;
      },
      py::arg("features"), py::arg("probes"), py::arg("scores"), py::arg("out"),
      py::arg("alpha") = 0.5, py::arg("workers") = 1);
  m.def(
      "run_eval",
      [](const Path& scores, const Path& report, std::optional<Path> roc_dir) {
        py::gil_scoped_release release;
        return cmd_eval({scores, report, roc_dir, std::nullopt}, context(0, 1)).roc_files;
      },
      py::arg("scores"), py::arg("report"), py::arg("roc_dir") = py::none(),
      "Writes the report JSON and returns the ROC CSV paths.");
}
