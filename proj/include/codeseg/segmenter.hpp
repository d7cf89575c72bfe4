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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codeseg/models.hpp"

namespace codeseg {

inline constexpr std::string_view kSegmentMarker = "---- segment ----";

struct NewlineScore {
  std::size_t offset = 0;  // 0-based byte offset of the LF
  std::size_t line = 0;    // 1-based line the LF terminates
  double probability = 0.0;
  bool is_boundary = false;

  friend bool operator==(const NewlineScore&, const NewlineScore&) = default;
};

// Inclusive, 1-based line range.
struct Segment {
  std::size_t start_line = 0;
  std::size_t end_line = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentationResult {
  std::string file_id;
  std::vector<NewlineScore> newlines;
  double threshold = 0.5;
  std::vector<Segment> segments;

  friend bool operator==(const SegmentationResult&, const SegmentationResult&) = default;
};

// One boundary probability per LF in `bytes`, in offset order.
std::vector<double> newline_probabilities(const ModelParams& model, std::string_view bytes);

// Builds a result from per-LF probabilities. A file of n LFs has n + 1
// lines; an empty file has no segments.
SegmentationResult make_segmentation(std::string_view bytes,
                                     std::span<const double> probabilities,
                                     double threshold, std::string file_id = {});

SegmentationResult segment_file(const ModelParams& model, std::string_view bytes,
                                double threshold = 0.5, std::string file_id = {});

// Inserts "---- segment ---- p=<prob>" after every boundary newline.
std::string render_annotated(std::string_view bytes, const SegmentationResult& result);
// Removes marker rows inserted by render_annotated.
std::string strip_annotations(std::string_view text);

std::string result_to_json(const SegmentationResult& result);
SegmentationResult result_from_json(std::string_view json);

}  // namespace codeseg
