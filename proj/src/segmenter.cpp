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

#include "codeseg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

#include "codeseg/error.hpp"

namespace codeseg {
namespace {

// Largest double below 1. A sigmoid can round to exactly 1.0; keeping scores
// under 1 makes a threshold of 1.0 mean "no boundaries".
constexpr double kMaxProbability = 1.0 - std::numeric_limits<double>::epsilon() / 2;

std::vector<std::size_t> newline_offsets(std::string_view bytes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == '\n') out.push_back(i);
  }
  return out;
}

std::vector<double> centered_scores(const ModelParams& model, std::string_view bytes,
                                    std::span<const std::size_t> lfs) {
  std::vector<double> out;
  out.reserve(lfs.size());
  Rng unused(0);
  const std::size_t radius = model.spec.window / 2;
  for (std::size_t off : lfs) {
    const auto window = centered_window(bytes, off, radius);
    out.push_back(centered_forward(model, window, false, unused));
  }
  return out;
}

std::vector<double> uncentered_scores(const ModelParams& model, std::string_view bytes,
                                      std::span<const std::size_t> lfs) {
  std::vector<double> out;
  out.reserve(lfs.size());
  Rng unused(0);
  const std::size_t width = model.spec.window;
  std::vector<Symbol> chunk(width);
  std::size_t next = 0;  // index into lfs
  for (std::size_t start = 0; start < bytes.size() && next < lfs.size(); start += width) {
    if (lfs[next] >= start + width) continue;  // no LF in this chunk
    for (std::size_t i = 0; i < width; ++i) {
      chunk[i] = start + i < bytes.size() ? static_cast<unsigned char>(bytes[start + i])
                                          : kPadSymbol;
    }
    const auto probs = uncentered_forward(model, chunk, false, unused);
    while (next < lfs.size() && lfs[next] < start + width) {
      out.push_back(probs[lfs[next] - start]);
      ++next;
    }
  }
  return out;
}

std::vector<double> logreg_scores(const ModelParams& model, std::string_view bytes,
                                  std::span<const std::size_t> lfs) {
  // Edge newlines that no full 7-line window can center on keep probability 0.
  std::vector<double> out(lfs.size(), 0.0);
  const std::size_t n_lines = lfs.size() + 1;
  if (n_lines < kBagLines) return out;
  auto line_at = [&](std::size_t k) {
    const std::size_t begin = k == 0 ? 0 : lfs[k - 1] + 1;
    const std::size_t end = k < lfs.size() ? lfs[k] : bytes.size();
    return bytes.substr(begin, end - begin);
  };
  std::array<std::uint32_t, kBagDim> counts{};
  for (std::size_t first = 0; first + kBagLines <= n_lines; ++first) {
    for (std::size_t k = 0; k < kBagLines; ++k) {
      const auto bag = line_bag(line_at(first + k));
      std::copy(bag.begin(), bag.end(), counts.begin() + k * kByteAlphabet);
    }
    out[first + kBagLabelLine - 1] = logreg_forward(model, counts);
  }
  return out;
}

}  // namespace

std::vector<double> newline_probabilities(const ModelParams& model, std::string_view bytes) {
  const auto lfs = newline_offsets(bytes);
  std::vector<double> probs;
  switch (model.spec.kind) {
    case ModelKind::kCentered: probs = centered_scores(model, bytes, lfs); break;
    case ModelKind::kUncentered: probs = uncentered_scores(model, bytes, lfs); break;
    case ModelKind::kLogreg: probs = logreg_scores(model, bytes, lfs); break;
    default: fail(ErrorCode::kConfig, "unknown model kind");
  }
  for (double& p : probs) p = std::min(p, kMaxProbability);
  return probs;
}

SegmentationResult make_segmentation(std::string_view bytes, std::span<const double> probabilities,
                                     double threshold, std::string file_id) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::kConfig, "threshold must lie in [0, 1]");
  }
  const auto lfs = newline_offsets(bytes);
  if (probabilities.size() != lfs.size()) {
    fail(ErrorCode::kShapeMismatch, "need exactly one probability per newline");
  }
  SegmentationResult r;
  r.file_id = std::move(file_id);
  r.threshold = threshold;
  if (bytes.empty()) return r;

  std::size_t start = 1;
  for (std::size_t k = 0; k < lfs.size(); ++k) {
    NewlineScore s{lfs[k], k + 1, probabilities[k], probabilities[k] >= threshold};
    r.newlines.push_back(s);
    if (s.is_boundary) {
      r.segments.push_back({start, s.line});
      start = s.line + 1;
    }
  }
  r.segments.push_back({start, lfs.size() + 1});
  return r;
}

SegmentationResult segment_file(const ModelParams& model, std::string_view bytes, double threshold,
                                std::string file_id) {
  const auto probs = newline_probabilities(model, bytes);
  return make_segmentation(bytes, probs, threshold, std::move(file_id));
}

std::string render_annotated(std::string_view bytes, const SegmentationResult& result) {
  std::string out;
  out.reserve(bytes.size() + result.segments.size() * 32);
  std::size_t pos = 0;
  for (const auto& nl : result.newlines) {
    if (!nl.is_boundary) continue;
    if (nl.offset >= bytes.size() || bytes[nl.offset] != '\n' || nl.offset < pos) {
      fail(ErrorCode::kPrecondition,
           "render_annotated: newline offset " + std::to_string(nl.offset) +
               " is not consistent with the file");
    }
    out.append(bytes.substr(pos, nl.offset + 1 - pos));
    pos = nl.offset + 1;
    char prob[32];
    std::snprintf(prob, sizeof(prob), "%.4f", nl.probability);
    out.append(kSegmentMarker).append(" p=").append(prob).push_back('\n');
  }
  out.append(bytes.substr(pos));
  return out;
}

std::string strip_annotations(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    const bool terminated = end != std::string_view::npos;
    if (!terminated) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    const bool marker = terminated && line.starts_with(kSegmentMarker);
    if (!marker) out.append(text.substr(pos, end - pos + (terminated ? 1 : 0)));
    pos = end + 1;
  }
  return out;
}

std::string result_to_json(const SegmentationResult& r) {
  nlohmann::ordered_json j;
  j["file_id"] = r.file_id;
  j["threshold"] = r.threshold;
  auto& newlines = j["newlines"] = nlohmann::ordered_json::array();
  for (const auto& n : r.newlines) {
    newlines.push_back({{"offset", n.offset},
                        {"line", n.line},
                        {"probability", n.probability},
                        {"is_boundary", n.is_boundary}});
  }
  auto& segments = j["segments"] = nlohmann::ordered_json::array();
  for (const auto& s : r.segments) {
    segments.push_back({{"start_line", s.start_line}, {"end_line", s.end_line}});
  }
  return j.dump(2);
}

SegmentationResult result_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SegmentationResult r;
    r.file_id = j.at("file_id").get<std::string>();
    r.threshold = j.at("threshold").get<double>();
    for (const auto& n : j.at("newlines")) {
      r.newlines.push_back({n.at("offset").get<std::size_t>(), n.at("line").get<std::size_t>(),
                            n.at("probability").get<double>(), n.at("is_boundary").get<bool>()});
    }
    for (const auto& s : j.at("segments")) {
      r.segments.push_back({s.at("start_line").get<std::size_t>(), s.at("end_line").get<std::size_t>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("invalid segmentation JSON: ") + e.what());
  }
}

}  // namespace codeseg
