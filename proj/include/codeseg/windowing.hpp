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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "codeseg/corpus.hpp"

namespace codeseg {

using Symbol = std::uint16_t;

inline constexpr std::size_t kByteAlphabet = 256;
// Symbol used for window positions that fall outside the block or file.
inline constexpr Symbol kPadSymbol = 256;
inline constexpr std::size_t kVocabSize = 257;
inline constexpr Symbol kNewline = 0x0A;

inline constexpr std::size_t kBagLines = 7;
// 1-based index of the line whose terminating LF labels a bag window.
inline constexpr std::size_t kBagLabelLine = 4;
inline constexpr std::size_t kBagDim = kBagLines * kByteAlphabet;  // 1792
inline constexpr std::size_t kSeqWindow = 100;
inline constexpr std::size_t kCenterRadius = 50;
inline constexpr std::size_t kCenteredWindow = 2 * kCenterRadius + 1;  // 101

struct BagSample {
  std::array<std::uint32_t, kBagDim> counts{};
  std::uint8_t label = 0;

  friend bool operator==(const BagSample&, const BagSample&) = default;
};

struct SeqSample {
  std::array<Symbol, kSeqWindow> symbols{};
  std::array<std::uint8_t, kSeqWindow> labels{};

  friend bool operator==(const SeqSample&, const SeqSample&) = default;
};

struct CenteredSample {
  std::array<Symbol, kCenteredWindow> symbols{};
  std::uint8_t label = 0;

  friend bool operator==(const CenteredSample&, const CenteredSample&) = default;
};

enum class SampleVariant : std::uint8_t { kBag = 0, kUncentered = 1, kCentered = 2 };

std::string_view variant_name(SampleVariant v);
SampleVariant parse_variant(std::string_view name);

using SampleSet = std::variant<std::vector<BagSample>, std::vector<SeqSample>,
                               std::vector<CenteredSample>>;

SampleVariant variant_of(const SampleSet& set);
std::size_t sample_count(const SampleSet& set);

std::array<std::uint32_t, kByteAlphabet> line_bag(std::string_view line);

// One sample per 7-line window, stride one line. Blocks with fewer than seven
// lines yield nothing.
std::vector<BagSample> gen_bag_samples(const Block& block);

// Non-overlapping 100-byte chunks from offset 0; the remainder is dropped.
std::vector<SeqSample> gen_uncentered_samples(const Block& block);

// One 101-symbol window per LF, padded with kPadSymbol past the block edges.
std::vector<CenteredSample> gen_centered_samples(const Block& block);

// Window of `2 * radius + 1` symbols centered on `center`, padded outside
// `bytes`.
std::vector<Symbol> centered_window(std::string_view bytes, std::size_t center,
                                    std::size_t radius = kCenterRadius);

struct SampleStats {
  std::size_t count = 0;
  // Fraction of label-1 samples; for SeqSample, fraction of LF positions
  // carrying label 1.
  double positive_fraction = 0.0;
};

SampleStats sample_stats(std::span<const BagSample> samples);
SampleStats sample_stats(std::span<const SeqSample> samples);
SampleStats sample_stats(std::span<const CenteredSample> samples);
SampleStats sample_stats(const SampleSet& set);

}  // namespace codeseg
