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

#include "codeseg/models.hpp"

namespace codeseg {

// "CSGM" checkpoint: magic, u16 version, then a payload holding the ArchSpec
// and named tensors (u32 shapes, little-endian f64 data), then the CRC-32 of
// the payload as u32.
inline constexpr char kModelMagic[4] = {'C', 'S', 'G', 'M'};
inline constexpr std::uint16_t kModelFormatVersion = 1;

void write_model(std::ostream& out, const ModelParams& params);
// Throws kBadMagic, kUnsupportedVersion, kChecksum or kShapeMismatch.
ModelParams read_model(std::istream& in);

void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace codeseg
