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

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "codeseg/windowing.hpp"

namespace codeseg {

// "CSEG" container: magic, u16 version, u8 variant tag, u64 sample count,
// then fixed-width little-endian records.
inline constexpr char kSampleMagic[4] = {'C', 'S', 'E', 'G'};
inline constexpr std::uint16_t kSampleFormatVersion = 1;

void write_samples(std::ostream& out, const SampleSet& samples);
SampleSet read_samples(std::istream& in);

void save_samples(const std::filesystem::path& path, const SampleSet& samples);
SampleSet load_samples(const std::filesystem::path& path);

}  // namespace codeseg
