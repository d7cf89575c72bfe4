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

#include "codeseg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "codeseg/error.hpp"
#include "codeseg/rng.hpp"

namespace codeseg {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Language parse_language(std::string_view name) {
  const std::string key = lower(name);
  if (key == "c") return Language::kC;
  if (key == "c++") return Language::kCpp;
  if (key == "java") return Language::kJava;
  if (key == "python") return Language::kPython;
  if (key == "javascript") return Language::kJavascript;
  if (key == "c#") return Language::kCSharp;
  return Language::kOther;
}

std::string_view language_name(Language lang) {
  switch (lang) {
    case Language::kC: return "c";
    case Language::kCpp: return "c++";
    case Language::kJava: return "java";
    case Language::kPython: return "python";
    case Language::kJavascript: return "javascript";
    case Language::kCSharp: return "c#";
    case Language::kOther: return "other";
  }
  return "other";
}

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string normalize_snippet_text(std::string_view text) {
  std::string out = normalize_newlines(text);
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::size_t line_count(std::string_view text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
}

LoadResult parse_corpus(std::string_view jsonl) {
  LoadResult result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (is_blank(line)) continue;

    auto record_error = [&](std::string msg) {
      result.errors.push_back({line_no, std::move(msg)});
    };

    nlohmann::json obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) {
      record_error("invalid JSON");
      continue;
    }
    if (!obj.is_object()) {
      record_error("record is not an object");
      continue;
    }
    bool ok = true;
    for (const char* field : {"id", "language", "text"}) {
      auto it = obj.find(field);
      if (it == obj.end() || !it->is_string()) {
        record_error(std::string("missing or non-string field '") + field + "'");
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    Snippet s;
    s.id = obj["id"].get<std::string>();
    s.language = parse_language(obj["language"].get<std::string>());
    s.text = normalize_snippet_text(obj["text"].get<std::string>());
    if (s.text.empty()) {
      record_error("empty text after normalization");
      continue;
    }
    result.snippets.push_back(std::move(s));
  }
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read corpus file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "error while reading corpus file: " + path.string());
  return parse_corpus(buf.str());
}

std::vector<Snippet> filter_snippets(const std::vector<Snippet>& snippets,
                                     std::size_t min_lines) {
  if (min_lines < 1) fail(ErrorCode::kConfig, "min_lines must be at least 1");
  std::vector<Snippet> kept;
  std::copy_if(snippets.begin(), snippets.end(), std::back_inserter(kept),
               [&](const Snippet& s) { return line_count(s.text) >= min_lines; });
  return kept;
}

std::vector<Snippet> shuffled(std::vector<Snippet> snippets, std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(std::span<Snippet>(snippets));
  return snippets;
}

CorpusSplit split_corpus(const std::vector<Snippet>& snippets, std::uint64_t seed) {
  const std::size_t n = snippets.size();
  if (n < 10) {
    fail(ErrorCode::kConfig, "need at least 10 snippets to split, got " + std::to_string(n));
  }
  std::vector<Snippet> order = shuffled(snippets, seed);
  const std::size_t cut_train = n * 8 / 10;
  const std::size_t cut_val = n * 9 / 10;

  CorpusSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + cut_train);
  split.validation.assign(order.begin() + cut_train, order.begin() + cut_val);
  split.test.assign(order.begin() + cut_val, order.end());
  return split;
}

Block build_block(const std::vector<Snippet>& snippets) {
  if (snippets.empty()) fail(ErrorCode::kPrecondition, "cannot build a block from zero snippets");
  Block block;
  block.snippet_count = snippets.size();
  std::size_t total = snippets.size() - 1;
  for (const auto& s : snippets) total += s.text.size();
  block.bytes.reserve(total);
  block.dividing_offsets.reserve(snippets.size() - 1);

  for (std::size_t i = 0; i < snippets.size(); ++i) {
    if (i > 0) {
      block.dividing_offsets.push_back(block.bytes.size());
      block.bytes.push_back('\n');
    }
    block.bytes += snippets[i].text;
  }
  return block;
}

std::vector<std::string> split_block(const Block& block) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t off : block.dividing_offsets) {
    parts.emplace_back(block.bytes.substr(start, off - start));
    start = off + 1;
  }
  parts.emplace_back(block.bytes.substr(start));
  return parts;
}

}  // namespace codeseg
