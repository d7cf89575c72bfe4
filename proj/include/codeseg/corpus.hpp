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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace codeseg {

enum class Language { kC, kCpp, kJava, kPython, kJavascript, kCSharp, kOther };

// Case-insensitive match against {c, c++, java, python, javascript, c#};
// anything else maps to kOther.
Language parse_language(std::string_view name);
std::string_view language_name(Language lang);

// One crowd-sourced code excerpt. `text` is normalized: no CR bytes, no
// trailing LF, non-empty.
struct Snippet {
  std::string id;
  Language language = Language::kOther;
  std::string text;

  friend bool operator==(const Snippet&, const Snippet&) = default;
};

// Concatenated snippets. Each entry of `dividing_offsets` indexes an LF in
// `bytes` that joins two snippets; offsets are strictly increasing.
struct Block {
  std::string bytes;
  std::vector<std::size_t> dividing_offsets;
  std::size_t snippet_count = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

struct CorpusSplit {
  std::vector<Snippet> train;
  std::vector<Snippet> validation;
  std::vector<Snippet> test;
  std::uint64_t seed = 0;
};

struct RecordError {
  std::size_t line_number;  // 1-based line in the corpus file
  std::string message;
};

struct LoadResult {
  std::vector<Snippet> snippets;
  std::vector<RecordError> errors;
};

inline constexpr std::size_t kDefaultMinLines = 4;

// CRLF and lone CR become LF. Trailing LFs are kept.
std::string normalize_newlines(std::string_view text);

// normalize_newlines plus stripping every trailing LF.
std::string normalize_snippet_text(std::string_view text);

// LF count + 1; `text` is expected to be normalized.
std::size_t line_count(std::string_view text);

// Reads a JSON-Lines corpus (fields id, language, text). Malformed lines are
// reported in LoadResult::errors and skipped; lines whose text normalizes to
// nothing are reported the same way. An unreadable file throws kIo.
LoadResult load_corpus(const std::filesystem::path& path);

// Same as load_corpus over an in-memory document.
LoadResult parse_corpus(std::string_view jsonl);

std::vector<Snippet> filter_snippets(const std::vector<Snippet>& snippets,
                                     std::size_t min_lines = kDefaultMinLines);

// Deterministic shuffle keyed by `seed`, then cut at floor(0.8n) and
// floor(0.9n). Requires at least 10 snippets.
CorpusSplit split_corpus(const std::vector<Snippet>& snippets, std::uint64_t seed);

// Joins snippet texts with a single LF and records those join offsets.
Block build_block(const std::vector<Snippet>& snippets);

// Inverse of build_block: cuts `block.bytes` at its dividing offsets.
std::vector<std::string> split_block(const Block& block);

// Returns a copy of `snippets` permuted by `seed`.
std::vector<Snippet> shuffled(std::vector<Snippet> snippets, std::uint64_t seed);

}  // namespace codeseg
