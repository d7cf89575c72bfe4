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

#include "codeseg/windowing.hpp"

#include <algorithm>

#include "codeseg/error.hpp"

namespace codeseg {
namespace {

bool is_dividing(const Block& block, std::size_t offset) {
  return std::binary_search(block.dividing_offsets.begin(), block.dividing_offsets.end(),
                            offset);
}

// Start offset of every line; a line ends at the next LF or at the end of bytes.
std::vector<std::size_t> line_starts(std::string_view bytes) {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == '\n') starts.push_back(i + 1);
  }
  return starts;
}

}  // namespace

std::string_view variant_name(SampleVariant v) {
  switch (v) {
    case SampleVariant::kBag: return "bag";
    case SampleVariant::kUncentered: return "uncentered";
    case SampleVariant::kCentered: return "centered";
  }
  return "?";
}

SampleVariant parse_variant(std::string_view name) {
  if (name == "bag") return SampleVariant::kBag;
  if (name == "uncentered") return SampleVariant::kUncentered;
  if (name == "centered") return SampleVariant::kCentered;
  fail(ErrorCode::kConfig, "unknown sample variant '" + std::string(name) + "'");
}

SampleVariant variant_of(const SampleSet& set) {
  return static_cast<SampleVariant>(set.index());
}

std::size_t sample_count(const SampleSet& set) {
  return std::visit([](const auto& v) { return v.size(); }, set);
}

std::array<std::uint32_t, kByteAlphabet> line_bag(std::string_view line) {
  std::array<std::uint32_t, kByteAlphabet> bag{};
  for (unsigned char c : line) ++bag[c];
  return bag;
}

std::vector<BagSample> gen_bag_samples(const Block& block) {
  std::string_view bytes = block.bytes;
  const std::vector<std::size_t> starts = line_starts(bytes);
  const std::size_t n_lines = starts.size();
  std::vector<BagSample> out;
  if (n_lines < kBagLines) return out;

  auto line_at = [&](std::size_t k) {
    std::size_t end = k + 1 < n_lines ? starts[k + 1] - 1 : bytes.size();
    return bytes.substr(starts[k], end - starts[k]);
  };

  out.reserve(n_lines - kBagLines + 1);
  for (std::size_t first = 0; first + kBagLines <= n_lines; ++first) {
    BagSample s;
    for (std::size_t k = 0; k < kBagLines; ++k) {
      const auto bag = line_bag(line_at(first + k));
      std::copy(bag.begin(), bag.end(), s.counts.begin() + k * kByteAlphabet);
    }
    // The labeled LF terminates the window's 4th line, so it sits just before
    // the start of the 5th line.
    const std::size_t lf = starts[first + kBagLabelLine] - 1;
    s.label = is_dividing(block, lf) ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

std::vector<SeqSample> gen_uncentered_samples(const Block& block) {
  const std::size_t chunks = block.bytes.size() / kSeqWindow;
  std::vector<SeqSample> out(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t i = 0; i < kSeqWindow; ++i) {
      const std::size_t off = c * kSeqWindow + i;
      out[c].symbols[i] = static_cast<unsigned char>(block.bytes[off]);
    }
  }
  for (std::size_t off : block.dividing_offsets) {
    if (off / kSeqWindow < chunks) out[off / kSeqWindow].labels[off % kSeqWindow] = 1;
  }
  return out;
}

std::vector<Symbol> centered_window(std::string_view bytes, std::size_t center,
                                    std::size_t radius) {
  std::vector<Symbol> window(2 * radius + 1, kPadSymbol);
  for (std::size_t i = 0; i < window.size(); ++i) {
    // Position relative to the block is center - radius + i.
    if (center + i < radius) continue;
    const std::size_t pos = center + i - radius;
    if (pos >= bytes.size()) break;
    window[i] = static_cast<unsigned char>(bytes[pos]);
  }
  return window;
}

std::vector<CenteredSample> gen_centered_samples(const Block& block) {
  std::vector<CenteredSample> out;
  std::string_view bytes = block.bytes;
  for (std::size_t off = 0; off < bytes.size(); ++off) {
    if (bytes[off] != '\n') continue;
    CenteredSample s;
    const auto window = centered_window(bytes, off);
    std::copy(window.begin(), window.end(), s.symbols.begin());
    s.label = is_dividing(block, off) ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

SampleStats sample_stats(std::span<const BagSample> samples) {
  SampleStats st{samples.size(), 0.0};
  if (samples.empty()) return st;
  std::size_t pos = 0;
  for (const auto& s : samples) pos += s.label;
  st.positive_fraction = static_cast<double>(pos) / static_cast<double>(samples.size());
  return st;
}

SampleStats sample_stats(std::span<const CenteredSample> samples) {
  SampleStats st{samples.size(), 0.0};
  if (samples.empty()) return st;
  std::size_t pos = 0;
  for (const auto& s : samples) pos += s.label;
  st.positive_fraction = static_cast<double>(pos) / static_cast<double>(samples.size());
  return st;
}

SampleStats sample_stats(std::span<const SeqSample> samples) {
  SampleStats st{samples.size(), 0.0};
  std::size_t newlines = 0;
  std::size_t pos = 0;
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < kSeqWindow; ++i) {
      if (s.symbols[i] != kNewline) continue;
      ++newlines;
      pos += s.labels[i];
    }
  }
  if (newlines > 0) st.positive_fraction = static_cast<double>(pos) / static_cast<double>(newlines);
  return st;
}

SampleStats sample_stats(const SampleSet& set) {
  return std::visit(
      [](const auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        return sample_stats(std::span<const T>(v));
      },
      set);
}

}  // namespace codeseg
