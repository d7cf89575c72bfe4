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

#include <string>

#include "doctest.h"

#include "codeseg/error.hpp"
#include "codeseg/segmenter.hpp"
#include "support/model_check.hpp"

using namespace codeseg;

namespace {

std::string random_file(Rng& rng, std::size_t max_len) {
  std::string s(rng.below(max_len + 1), 'x');
  for (char& c : s) {
    c = rng.below(6) == 0 ? '\n' : static_cast<char>('a' + rng.below(26));
  }
  return s;
}

ModelParams tiny_centered_model(std::uint64_t seed) {
  ArchSpec spec = ArchSpec::centered();
  spec.embed_dim = 3;
  spec.lstm_hidden = 3;
  spec.dense_sizes = {3, 1};
  Rng rng(seed);
  return init_model(spec, rng);
}

}  // namespace

TEST_SUITE("segmenter") {
  TEST_CASE("file without newlines is one segment") {
    const auto r = make_segmentation("int x;", {}, 0.5);
    CHECK(r.newlines.empty());
    REQUIRE(r.segments.size() == 1);
    CHECK(r.segments[0] == Segment{1, 1});
  }

  TEST_CASE("empty file has no segments") {
    const auto r = make_segmentation("", {}, 0.5);
    CHECK(r.segments.empty());
    CHECK(r.newlines.empty());
  }

  TEST_CASE("threshold extremes") {
    const std::string text = "a\nb\nc\nd";
    const std::vector<double> p{0.0, 0.3, 0.9999999};
    const auto all = make_segmentation(text, p, 0.0);
    CHECK(all.segments.size() == 4);
    const auto none = make_segmentation(text, p, 1.0);
    REQUIRE(none.segments.size() == 1);
    CHECK(none.segments[0] == Segment{1, 4});
    CHECK_THROWS_AS(make_segmentation(text, p, 1.5), Error);
    CHECK_THROWS_AS(make_segmentation(text, std::vector<double>{0.5}, 0.5), Error);
  }

  TEST_CASE("boundaries split after the newline's line") {
    const std::string text = "a\nb\nc\nd";
    const auto r = make_segmentation(text, std::vector<double>{0.1, 0.8, 0.2}, 0.5, "f.c");
    REQUIRE(r.segments.size() == 2);
    CHECK(r.segments[0] == Segment{1, 2});
    CHECK(r.segments[1] == Segment{3, 4});
    CHECK(r.newlines[1] == NewlineScore{3, 2, 0.8, true});
    CHECK(r.file_id == "f.c");
  }

  TEST_CASE("annotated rendering") {
    const std::string text = "a\nb\nc";
    const auto r = make_segmentation(text, std::vector<double>{0.75, 0.1}, 0.5);
    const std::string annotated = render_annotated(text, r);
    CHECK(annotated == "a\n---- segment ---- p=0.7500\nb\nc");
    CHECK(strip_annotations(annotated) == text);
  }

  TEST_CASE("JSON round-trip and field names") {
    const std::string text = "x\ny\n\nz";
    const auto r = make_segmentation(text, std::vector<double>{0.2, 0.6, 0.1}, 0.4, "in.py");
    const std::string json = result_to_json(r);
    for (const char* key : {"file_id", "threshold", "newlines", "offset", "line", "probability",
                            "is_boundary", "segments", "start_line", "end_line"}) {
      CHECK(json.find(std::string("\"") + key + "\"") != std::string::npos);
    }
    CHECK(result_from_json(json) == r);
    CHECK_THROWS_AS(result_from_json("{\"file_id\": 3}"), Error);
  }

  TEST_CASE("model-backed probabilities for every architecture") {
    Rng rng(1);
    const std::string text = "int main() {\n  return 0;\n}\n\ndef f():\n  pass\nx = 1\ny = 2\nz = 3\n";
    const std::size_t lfs = 9;

    const ModelParams centered = tiny_centered_model(2);
    const auto pc = newline_probabilities(centered, text);
    CHECK(pc.size() == lfs);

    ArchSpec us = ArchSpec::uncentered();
    us.embed_dim = 3;
    us.lstm_hidden = 3;
    us.dense_sizes = {3, 1};
    const auto pu = newline_probabilities(init_model(us, rng), text);
    CHECK(pu.size() == lfs);

    const auto pl = newline_probabilities(init_model(ArchSpec::logreg(), rng), text);
    REQUIRE(pl.size() == lfs);
    // Three leading and two trailing newlines lack a full 7-line context.
    for (std::size_t k = 0; k < lfs; ++k) {
      const bool scored = k >= 3 && k + 3 <= lfs;
      CHECK((pl[k] != 0.0) == scored);
    }
    for (const auto* p : {&pc, &pu, &pl}) {
      for (double v : *p) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
      }
    }
  }

  TEST_CASE("saturated scores stay below one") {
    ModelParams m = tiny_centered_model(3);
    m.aggregate.b.data[0] = 100.0;
    const auto r = segment_file(m, "a\nb\nc", 1.0);
    CHECK(r.segments.size() == 1);
    for (const auto& nl : r.newlines) CHECK(nl.probability < 1.0);
    CHECK(segment_file(m, "a\nb\nc", 0.99).segments.size() == 3);
  }

  TEST_CASE("random files satisfy the segmentation invariants") {
    Rng rng(4);
    const ModelParams m = tiny_centered_model(5);
    for (int trial = 0; trial < 30; ++trial) {
      const std::string text = random_file(rng, 300);
      const double t = rng.uniform();
      const auto r = segment_file(m, text, t);
      if (text.empty()) {
        CHECK(r.segments.empty());
        continue;
      }
      // Segments tile lines 1..n without gaps.
      std::size_t expected_start = 1;
      for (const auto& s : r.segments) {
        CHECK(s.start_line == expected_start);
        CHECK(s.end_line >= s.start_line);
        expected_start = s.end_line + 1;
      }
      CHECK(expected_start == r.newlines.size() + 2);
      for (std::size_t k = 1; k < r.newlines.size(); ++k) {
        CHECK(r.newlines[k].offset > r.newlines[k - 1].offset);
      }
      std::size_t boundaries = 0;
      for (const auto& nl : r.newlines) boundaries += nl.is_boundary;
      CHECK(r.segments.size() == boundaries + 1);
      CHECK(strip_annotations(render_annotated(text, r)) == text);
      // Raising the threshold never adds segments.
      CHECK(segment_file(m, text, std::min(1.0, t + 0.1)).segments.size() <= r.segments.size());
    }
  }
}
