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

#include <stdexcept>
#include <string>

namespace codeseg {

enum class ErrorCode {
  kIo = 1,
  kConfig,
  kFormat,
  kBadMagic,
  kUnsupportedVersion,
  kChecksum,
  kShapeMismatch,
  kNumerical,
  kPrecondition,
  kVariantMismatch,
};

const char* error_code_name(ErrorCode code);

// All fatal conditions in the library surface as this exception. The code
// lets callers (and the CLI) distinguish failure classes without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace codeseg
