// Copyright (c) the SELIC Project Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SELIC_CORE_ERROR_H_
#define SELIC_CORE_ERROR_H_

#include <stdexcept>
#include <string>

namespace selic {

enum class ErrorKind {
  kInvalidInput,
  kShape,
  kConfig,
  kBackendUnavailable,
  kCausality,
  kEncode,
  kDecode,
  kIo,
  kNumeric,
  kModel,
};

const char* ErrorKindName(ErrorKind kind);

// Every failure surfaced by the library is a selic::Error; callers branch on
// kind() (the CLI maps kinds onto its exit codes).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void Fail(ErrorKind kind, const std::string& message);

// Literal messages are only materialized on failure; build composed
// messages inside a branch in hot loops.
inline void Require(bool condition, ErrorKind kind, const char* message) {
  if (!condition) Fail(kind, message);
}
inline void Require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) Fail(kind, message);
}

}  // namespace selic

#endif  // SELIC_CORE_ERROR_H_
