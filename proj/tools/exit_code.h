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
#ifndef SELIC_TOOLS_EXIT_CODE_H_
#define SELIC_TOOLS_EXIT_CODE_H_

#include "selic/core/error.h"

namespace selic::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitModel = 4;

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return kExitUsage;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kShape:
    case ErrorKind::kIo:
    case ErrorKind::kDecode:
      return kExitData;
    case ErrorKind::kBackendUnavailable:
    case ErrorKind::kCausality:
    case ErrorKind::kEncode:
    case ErrorKind::kNumeric:
    case ErrorKind::kModel:
      return kExitModel;
  }
  return kExitModel;
}

}  // namespace selic::cli

#endif  // SELIC_TOOLS_EXIT_CODE_H_
