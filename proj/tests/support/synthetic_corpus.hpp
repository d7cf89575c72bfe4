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
#include <cstdint>
#include <string>
#include <vector>

#include "codeseg/corpus.hpp"
#include "codeseg/rng.hpp"

namespace codeseg::testing {

// Brace-delimited, semicolon-terminated toy language (tagged "c"). Each
// snippet draws its own identifier case, indent width and operator spacing.
Snippet brace_snippet(Rng& rng, std::size_t index);
// Indentation-structured toy language (tagged "python").
Snippet indent_snippet(Rng& rng, std::size_t index);

// `n` snippets alternating between the two toy languages.
std::vector<Snippet> synthetic_corpus(std::size_t n, std::uint64_t seed);

// Snippets whose block has exactly `dividing` dividing newlines among
// `total_newlines` newlines (every snippet has at least 4 lines).
std::vector<Snippet> exact_ratio_corpus(std::size_t total_newlines, std::size_t dividing);

// Random snippets of arbitrary bytes (no CR, no trailing LF, non-empty).
std::vector<Snippet> random_byte_snippets(Rng& rng, std::size_t count, std::size_t max_len);

std::string to_jsonl(const std::vector<Snippet>& snippets);

}  // namespace codeseg::testing
