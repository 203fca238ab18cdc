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
#include "selic/codec/segment.h"

#include <map>
#include <string>

#include "selic/core/error.h"

namespace selic::codec {
namespace {

class UniformTables {
 public:
  const CdfTable* Get(int size) {
    auto it = tables_.find(size);
    if (it == tables_.end()) it = tables_.emplace(size, CdfTable::Uniform(size)).first;
    return &it->second;
  }

 private:
  std::map<int, CdfTable> tables_;
};

void CheckTable(const BoundedTable& t, int levels) {
  if (t.lo < -levels || t.hi() > levels) {
    Fail(ErrorKind::kInvalidInput,
         "coding table [" + std::to_string(t.lo) + ", " + std::to_string(t.hi()) + "] exceeds symbol levels");
  }
}

}  // namespace

std::vector<uint8_t> EncodeSegment(std::span<const int32_t> values, std::span<const BoundedTable* const> tables,
                                   int levels, EntropyCoder& coder, SegmentStats* stats) {
  Require(values.size() == tables.size(), ErrorKind::kEncode, "one table per value required");
  std::vector<int32_t> main_symbols(values.size());
  std::vector<const CdfTable*> main_tables(values.size());
  std::vector<int32_t> escape_symbols;
  std::vector<const CdfTable*> escape_tables;
  UniformTables uniform;
  for (size_t i = 0; i < values.size(); ++i) {
    const BoundedTable& t = *tables[i];
    CheckTable(t, levels);
    const int32_t v = values[i];
    if (v < -levels || v > levels) Fail(ErrorKind::kEncode, "value " + std::to_string(v) + " outside symbol levels");
    main_tables[i] = &t.cdf;
    if (v <= t.lo && t.lo > -levels) {
      main_symbols[i] = 0;
      escape_symbols.push_back(t.lo - v);
      escape_tables.push_back(uniform.Get(t.lo + levels + 1));
    } else if (v >= t.hi() && t.hi() < levels) {
      main_symbols[i] = t.hi() - t.lo;
      escape_symbols.push_back(v - t.hi());
      escape_tables.push_back(uniform.Get(levels - t.hi() + 1));
    } else {
      main_symbols[i] = v - t.lo;
    }
  }
  std::vector<uint8_t> out = coder.Encode(main_symbols, main_tables);
  if (!escape_symbols.empty()) {
    const std::vector<uint8_t> tail = coder.Encode(escape_symbols, escape_tables);
    out.insert(out.end(), tail.begin(), tail.end());
  }
  if (stats != nullptr) stats->escapes += escape_symbols.size();
  return out;
}

std::vector<int32_t> DecodeSegment(std::span<const uint8_t> bytes, std::span<const BoundedTable* const> tables,
                                   int levels, EntropyCoder& coder) {
  std::vector<const CdfTable*> main_tables(tables.size());
  for (size_t i = 0; i < tables.size(); ++i) {
    CheckTable(*tables[i], levels);
    main_tables[i] = &tables[i]->cdf;
  }
  std::vector<int32_t> values(tables.size());
  const size_t consumed = coder.Decode(bytes, main_tables, values);

  std::vector<size_t> escape_index;
  std::vector<const CdfTable*> escape_tables;
  UniformTables uniform;
  for (size_t i = 0; i < values.size(); ++i) {
    const BoundedTable& t = *tables[i];
    const int32_t v = values[i] + t.lo;
    values[i] = v;
    if (v == t.lo && t.lo > -levels) {
      escape_index.push_back(i);
      escape_tables.push_back(uniform.Get(t.lo + levels + 1));
    } else if (v == t.hi() && t.hi() < levels) {
      escape_index.push_back(i);
      escape_tables.push_back(uniform.Get(levels - t.hi() + 1));
    }
  }
  const std::span<const uint8_t> tail = bytes.subspan(consumed);
  if (escape_index.empty()) {
    Require(tail.empty(), ErrorKind::kDecode, "segment has trailing bytes");
    return values;
  }
  std::vector<int32_t> excess(escape_index.size());
  Require(coder.Decode(tail, escape_tables, excess) == tail.size(), ErrorKind::kDecode,
          "escape stream has trailing bytes");
  for (size_t j = 0; j < escape_index.size(); ++j) {
    const size_t i = escape_index[j];
    values[i] += values[i] == tables[i]->lo && tables[i]->lo > -levels ? -excess[j] : excess[j];
  }
  return values;
}

}  // namespace selic::codec
