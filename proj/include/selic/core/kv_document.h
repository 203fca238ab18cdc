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
#ifndef SELIC_CORE_KV_DOCUMENT_H_
#define SELIC_CORE_KV_DOCUMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace selic {

// Flat UTF-8 "key = value" document. Blank lines and lines starting with '#'
// are ignored; duplicate keys are a config error. Entry order is preserved.
class KeyValueDocument {
 public:
  static KeyValueDocument Parse(std::string_view text);
  static KeyValueDocument Load(const std::filesystem::path& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(std::string_view key) const;
  const std::string& Get(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string ToString() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

int64_t ParseInt(std::string_view key, std::string_view value);
double ParseReal(std::string_view key, std::string_view value);
bool ParseBool(std::string_view key, std::string_view value);

// Shortest representation that parses back to the same double.
std::string FormatReal(double value);

}  // namespace selic

#endif  // SELIC_CORE_KV_DOCUMENT_H_
