/* Copyright 2026 The codeseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "codeseg/checkpoint.hpp"
#include "codeseg/cli.hpp"
#include "codeseg/corpus.hpp"
#include "codeseg/error.hpp"
#include "codeseg/models.hpp"
#include "codeseg/sample_io.hpp"
#include "codeseg/segmenter.hpp"
#include "codeseg/training.hpp"
#include "codeseg/windowing.hpp"

namespace py = pybind11;
using namespace codeseg;

namespace {

// Source text arrives as str (UTF-8) or bytes; both map to raw bytes.
std::string as_bytes(const py::object& text) {
  if (py::isinstance<py::bytes>(text)) return text.cast<std::string>();
  return py::str(text).cast<std::string>();
}

py::dict spec_dict(const ArchSpec& s) {
  py::dict d;
  d["kind"] = std::string(kind_name(s.kind));
  d["vocab"] = s.vocab;
  d["embed_dim"] = s.embed_dim;
  d["lstm_hidden"] = s.lstm_hidden;
  d["dense_sizes"] = s.dense_sizes;
  d["window"] = s.window;
  d["bag_dim"] = s.bag_dim;
  d["dropout_rate"] = s.dropout_rate;
  return d;
}

py::dict segmentation_dict(const SegmentationResult& r) {
  py::list newlines, segments;
  for (const auto& n : r.newlines) {
    py::dict d;
    d["offset"] = n.offset;
    d["line"] = n.line;
    d["probability"] = n.probability;
    d["is_boundary"] = n.is_boundary;
    newlines.append(d);
  }
  for (const auto& s : r.segments) {
    py::dict d;
    d["start_line"] = s.start_line;
    d["end_line"] = s.end_line;
    segments.append(d);
  }
  py::dict out;
  out["file_id"] = r.file_id;
  out["threshold"] = r.threshold;
  out["newlines"] = newlines;
  out["segments"] = segments;
  return out;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["newline_accuracy"] = r.newline_accuracy;
  d["scored_newlines"] = r.scored();
  d["true_positives"] = r.true_positives;
  d["true_negatives"] = r.true_negatives;
  d["false_positives"] = r.false_positives;
  d["false_negatives"] = r.false_negatives;
  d["positive_rate"] = r.positive_rate;
  return d;
}

ModelParams make_model(const std::string& kind, std::uint64_t seed, std::size_t embed_dim,
                       std::size_t hidden, std::vector<std::size_t> dense, double dropout) {
  ArchSpec spec = ArchSpec::defaults(parse_kind(kind));
  if (embed_dim) spec.embed_dim = embed_dim;
  if (hidden) spec.lstm_hidden = hidden;
  if (!dense.empty()) spec.dense_sizes = std::move(dense);
  if (dropout >= 0.0) spec.dropout_rate = dropout;
  Rng rng = Rng(seed).derive(0);
  return init_model(spec, rng);
}

}  // namespace

PYBIND11_MODULE(_codeseg, m) {
  m.doc() = "Learned logical segmentation of source code";

  py::register_exception<Error>(m, "CodesegError", PyExc_RuntimeError);

  m.def("normalize_newlines", [](const py::object& text) {
    return py::bytes(normalize_newlines(as_bytes(text)));
  }, py::arg("text"), "Convert CRLF and lone CR to LF.");

  m.def("load_corpus", [](const std::string& path) {
    const LoadResult r = load_corpus(path);
    py::list snippets, errors;
    for (const auto& s : r.snippets) {
      py::dict d;
      d["id"] = s.id;
      d["language"] = std::string(language_name(s.language));
      d["text"] = py::bytes(s.text);
      snippets.append(d);
    }
    for (const auto& e : r.errors) errors.append(py::make_tuple(e.line_number, e.message));
    return py::make_tuple(snippets, errors);
  }, py::arg("path"), "Read a JSON-Lines corpus; returns (snippets, record errors).");

  m.def("build_block", [](const std::vector<py::object>& texts) {
    std::vector<Snippet> snippets;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      snippets.push_back({std::to_string(i), Language::kOther,
                          normalize_snippet_text(as_bytes(texts[i]))});
    }
    const Block b = build_block(snippets);
    return py::make_tuple(py::bytes(b.bytes), b.dividing_offsets);
  }, py::arg("texts"), "Join snippets with dividing newlines; returns (bytes, offsets).");

  m.def("sample_counts", [](const std::vector<py::object>& texts) {
    std::vector<Snippet> snippets;
    for (const auto& t : texts) snippets.push_back({"", Language::kOther, normalize_snippet_text(as_bytes(t))});
    const Block b = build_block(snippets);
    py::dict d;
    d["bag"] = gen_bag_samples(b).size();
    d["uncentered"] = gen_uncentered_samples(b).size();
    d["centered"] = gen_centered_samples(b).size();
    return d;
  }, py::arg("texts"), "Number of samples each variant yields for a block of snippets.");

  py::class_<ModelParams>(m, "Model")
      .def_property_readonly("kind", [](const ModelParams& p) { return std::string(kind_name(p.spec.kind)); })
      .def_property_readonly("spec", [](const ModelParams& p) { return spec_dict(p.spec); })
      .def_property_readonly("parameter_count", &ModelParams::parameter_count)
      .def("save", [](const ModelParams& p, const std::string& path) { save_model(p, path); },
           py::arg("path"))
      .def("newline_probabilities", [](const ModelParams& p, const py::object& text) {
        return newline_probabilities(p, normalize_newlines(as_bytes(text)));
      }, py::arg("text"))
      .def("segment", [](const ModelParams& p, const py::object& text, double threshold,
                         const std::string& file_id) {
        return segmentation_dict(segment_file(p, normalize_newlines(as_bytes(text)), threshold, file_id));
      }, py::arg("text"), py::arg("threshold") = 0.5, py::arg("file_id") = "")
      .def("annotate", [](const ModelParams& p, const py::object& text, double threshold) {
        const std::string bytes = normalize_newlines(as_bytes(text));
        return py::bytes(render_annotated(bytes, segment_file(p, bytes, threshold)));
      }, py::arg("text"), py::arg("threshold") = 0.5)
      .def("evaluate", [](const ModelParams& p, const std::string& samples_path, double threshold) {
        return report_dict(evaluate(p, load_samples(samples_path), threshold));
      }, py::arg("samples_path"), py::arg("threshold") = 0.5);

  m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));
  m.def("init_model", &make_model, py::arg("kind"), py::arg("seed") = 42,
        py::arg("embed_dim") = 0, py::arg("hidden") = 0,
        py::arg("dense") = std::vector<std::size_t>{}, py::arg("dropout") = -1.0,
        "Freshly initialized model; zero/empty/negative arguments keep the defaults.");

  m.def("strip_annotations", [](const py::object& text) {
    return py::bytes(strip_annotations(as_bytes(text)));
  }, py::arg("text"));

  m.def("baseline_accuracy", [](const std::string& samples_path) {
    return baseline_accuracy(load_samples(samples_path));
  }, py::arg("samples_path"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run a codeseg subcommand; returns (exit code, stdout, stderr).");
}
