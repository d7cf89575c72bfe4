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

#include "codeseg/sample_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <type_traits>

#include "codeseg/error.hpp"

namespace codeseg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "sample files are written with little-endian host layout");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const T* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    fail(ErrorCode::kFormat, "sample file truncated");
  }
  return v;
}

template <typename T>
void get_array(std::istream& in, T* data, std::size_t n) {
  if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(T)))) {
    fail(ErrorCode::kFormat, "sample file truncated");
  }
}

void check_symbols(const Symbol* s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] >= kVocabSize) fail(ErrorCode::kFormat, "symbol out of range in sample file");
  }
}

}  // namespace

void write_samples(std::ostream& out, const SampleSet& samples) {
  out.write(kSampleMagic, 4);
  put<std::uint16_t>(out, kSampleFormatVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(variant_of(samples)));
  put<std::uint64_t>(out, sample_count(samples));
  std::visit(
      [&](const auto& list) {
        for (const auto& s : list) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, BagSample>) {
            put_array(out, s.counts.data(), s.counts.size());
            put<std::uint8_t>(out, s.label);
          } else if constexpr (std::is_same_v<T, SeqSample>) {
            put_array(out, s.symbols.data(), s.symbols.size());
            put_array(out, s.labels.data(), s.labels.size());
          } else {
            put_array(out, s.symbols.data(), s.symbols.size());
            put<std::uint8_t>(out, s.label);
          }
        }
      },
      samples);
  if (!out) fail(ErrorCode::kIo, "failed writing sample file");
}

SampleSet read_samples(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kSampleMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, "not a CSEG sample file");
  }
  const auto version = get<std::uint16_t>(in);
  if (version != kSampleFormatVersion) {
    fail(ErrorCode::kUnsupportedVersion,
         "unsupported sample file version " + std::to_string(version));
  }
  const auto tag = get<std::uint8_t>(in);
  const auto count = get<std::uint64_t>(in);

  auto read_list = [&](auto& list) {
    using T = typename std::decay_t<decltype(list)>::value_type;
    // Grow incrementally so a corrupt count cannot force a huge allocation.
    for (std::uint64_t i = 0; i < count; ++i) {
      T s{};
      if constexpr (std::is_same_v<T, BagSample>) {
        get_array(in, s.counts.data(), s.counts.size());
        s.label = get<std::uint8_t>(in);
      } else if constexpr (std::is_same_v<T, SeqSample>) {
        get_array(in, s.symbols.data(), s.symbols.size());
        get_array(in, s.labels.data(), s.labels.size());
        check_symbols(s.symbols.data(), s.symbols.size());
      } else {
        get_array(in, s.symbols.data(), s.symbols.size());
        s.label = get<std::uint8_t>(in);
        check_symbols(s.symbols.data(), s.symbols.size());
      }
      list.push_back(s);
    }
  };

  switch (tag) {
    case static_cast<std::uint8_t>(SampleVariant::kBag): {
      std::vector<BagSample> v;
      read_list(v);
      return v;
    }
    case static_cast<std::uint8_t>(SampleVariant::kUncentered): {
      std::vector<SeqSample> v;
      read_list(v);
      return v;
    }
    case static_cast<std::uint8_t>(SampleVariant::kCentered): {
      std::vector<CenteredSample> v;
      read_list(v);
      return v;
    }
    default:
      fail(ErrorCode::kFormat, "unknown sample variant tag " + std::to_string(tag));
  }
}

void save_samples(const std::filesystem::path& path, const SampleSet& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write sample file: " + path.string());
  write_samples(out, samples);
}

SampleSet load_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read sample file: " + path.string());
  return read_samples(in);
}

}  // namespace codeseg
