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

#include "codeseg/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string>

namespace codeseg::log {
namespace {

Level from_env() {
  const char* raw = std::getenv("CODESEG_LOG");
  if (raw == nullptr) return Level::kInfo;
  std::string v(raw);
  if (v == "error") return Level::kError;
  if (v == "debug") return Level::kDebug;
  return Level::kInfo;
}

std::atomic<int>& current() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

const char* tag(Level level) {
  switch (level) {
    case Level::kError: return "error";
    case Level::kInfo: return "info";
    case Level::kDebug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }

void set_threshold(Level level) { current().store(static_cast<int>(level)); }

void write(Level level, std::string_view message) {
  if (static_cast<int>(level) > current().load()) return;
  std::cerr << "[codeseg " << tag(level) << "] " << message << '\n';
}

}  // namespace codeseg::log
