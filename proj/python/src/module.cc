// Copyright 2026 The kblock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <memory>

#include "kblock/annotation.h"
#include "kblock/config.h"
#include "kblock/corpus.h"
#include "kblock/error.h"
#include "kblock/evaluation.h"
#include "kblock/ngram.h"
#include "kblock/rng.h"
#include "kblock/scorer.h"
#include "kblock/shuffle.h"

namespace py = pybind11;

namespace kblock {
namespace {

using Docs = std::vector<std::pair<std::string, std::vector<std::string>>>;

Corpus to_corpus(const Docs& docs, const std::string& domain) {
  Corpus c;
  c.domain = domain;
  for (const auto& [id, sentences] : docs) c.documents.push_back(make_document(id, sentences));
  return c;
}

std::vector<std::string> texts(const Document& d) {
  std::vector<std::string> out;
  for (const auto& s : d.sentences) out.push_back(s.text);
  return out;
}

// Round-trips through the JSON text so Python sees plain dicts and lists.
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

RunOptions run_options(std::size_t max_sentences, std::size_t workers, std::size_t samples) {
  RunOptions opts;
  opts.max_sentences = max_sentences;
  opts.workers = workers;
  opts.samples = samples;
  return opts;
}

py::object sweep(const Corpus& corpus, const Scorer& scorer, const std::vector<std::size_t>& ks,
                 std::uint64_t seed, const RunOptions& opts) {
  RunReport report;
  {
    py::gil_scoped_release release;
    report = kbst_sweep(corpus, scorer, ks, seed, opts);
  }
  return to_python(report_to_json(report));
}

}  // namespace
}  // namespace kblock

PYBIND11_MODULE(_core, m) {
  using namespace kblock;
  m.doc() = "k-block shuffle test core";

  static py::exception<Error> error(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<ProviderError> provider_error(m, "ProviderError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ProviderError& e) {
      py::set_error(provider_error, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.attr("UNSHUFFLABLE") = std::string(kUnshufflable);
  m.attr("DEFAULT_SEED") = kDefaultRunSeed;

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "segment",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& s : segment_sentences(text)) out.push_back(s.text);
        return out;
      },
      py::arg("text"));
  m.def(
      "derive_seed",
      [](std::uint64_t seed, const std::string& key, std::uint64_t k) {
        return derive_seed(seed, key, k);
      },
      py::arg("seed"), py::arg("key"), py::arg("k"));
  m.def(
      "shuffle_blocks",
      [](std::size_t n, std::uint64_t seed) { return shuffle_blocks(n, seed); }, py::arg("n"),
      py::arg("seed"));
  m.def(
      "make_instance",
      [](const std::vector<std::string>& sentences, std::size_t k, std::uint64_t seed,
         const std::string& doc_id) {
        const ShuffleInstance inst = make_instance(make_document(doc_id, sentences), k, seed);
        py::dict d;
        d["original"] = texts(inst.original);
        d["shuffled"] = texts(inst.shuffled);
        d["permutation"] = inst.permutation;
        d["k"] = inst.k;
        d["seed"] = inst.seed;
        return d;
      },
      py::arg("sentences"), py::arg("k"), py::arg("seed"), py::arg("doc_id") = "doc");
  m.def(
      "load_corpus",
      [](const std::filesystem::path& path, const std::string& format, bool pre_segmented) {
        IngestOptions opts;
        opts.pre_segmented = pre_segmented;
        const bool jsonl = format == "jsonl" ||
                           (format == "auto" && (path.extension() == ".jsonl" ||
                                                 path.extension() == ".json"));
        const IngestResult r = jsonl ? ingest_jsonl(path, opts) : ingest_text(path, opts);
        Docs docs;
        for (const auto& d : r.corpus.documents) docs.emplace_back(d.id, texts(d));
        return docs;
      },
      py::arg("path"), py::arg("format") = "auto", py::arg("pre_segmented") = false);

  py::class_<NgramModel, std::shared_ptr<NgramModel>>(m, "NgramModel")
      .def_static(
          "train",
          [](const Docs& docs, int order, const std::string& smoothing,
             const std::vector<double>& lambdas) {
            return std::make_shared<NgramModel>(
                train_ngram(to_corpus(docs, "train"), order,
                            SmoothingConfig::parse(smoothing, lambdas)));
          },
          py::arg("docs"), py::arg("order") = 3, py::arg("smoothing") = "witten_bell",
          py::arg("lambdas") = std::vector<double>{})
      .def_static(
          "load",
          [](const std::filesystem::path& path) {
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open model " + path.string());
            return std::make_shared<NgramModel>(NgramModel::load(in));
          },
          py::arg("path"))
      .def(
          "save",
          [](const NgramModel& self, const std::filesystem::path& path) {
            std::ofstream out(path);
            self.save(out);
          },
          py::arg("path"))
      .def_property_readonly("order", &NgramModel::order)
      .def_property_readonly("vocabulary_size", &NgramModel::vocabulary_size)
      .def(
          "prob",
          [](const NgramModel& self, const std::vector<std::string>& context,
             const std::string& token) { return self.prob(context, token); },
          py::arg("context"), py::arg("token"))
      .def(
          "score",
          [](const NgramModel& self, const std::vector<std::string>& sentences,
             std::size_t window_tokens, double overlap_fraction) {
            return sliding_window_score(ngram_stream(make_document("doc", sentences)), self,
                                        {window_tokens, overlap_fraction})
                .score;
          },
          py::arg("sentences"), py::arg("window_tokens") = 512,
          py::arg("overlap_fraction") = 0.5);

  m.def(
      "evaluate_ngram",
      [](const Docs& docs, std::shared_ptr<NgramModel> model, const std::vector<std::size_t>& ks,
         std::uint64_t seed, const std::string& domain, std::size_t max_sentences,
         std::size_t workers, std::size_t samples) {
        const NgramScorer scorer(model);
        return sweep(to_corpus(docs, domain), scorer, ks, seed,
                     run_options(max_sentences, workers, samples));
      },
      py::arg("docs"), py::arg("model"), py::arg("ks") = std::vector<std::size_t>{1, 2, 3, 4, 5},
      py::arg("seed") = kDefaultRunSeed, py::arg("domain") = "python",
      py::arg("max_sentences") = 20, py::arg("workers") = 1, py::arg("samples") = 1);
  m.def(
      "evaluate_external",
      [](const Docs& docs, const std::string& command, const std::string& mode,
         const std::vector<std::size_t>& ks, std::uint64_t seed, const std::string& domain,
         std::size_t max_sentences, std::size_t workers, double timeout_seconds) {
        HandleOptions hopts;
        hopts.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_seconds * 1000));
        const auto scorer = ExternalScorer::spawn(command, parse_score_mode(mode), hopts);
        return sweep(to_corpus(docs, domain), *scorer, ks, seed,
                     run_options(max_sentences, workers, 1));
      },
      py::arg("docs"), py::arg("command"), py::arg("mode") = "generative",
      py::arg("ks") = std::vector<std::size_t>{1, 2, 3, 4, 5},
      py::arg("seed") = kDefaultRunSeed, py::arg("domain") = "python",
      py::arg("max_sentences") = 20, py::arg("workers") = 1, py::arg("timeout_seconds") = 120.0);

  m.def(
      "cohen_kappa",
      [](const std::vector<std::string>& x, const std::vector<std::string>& y) {
        return cohen_kappa(x, y);
      },
      py::arg("x"), py::arg("y"));
}
