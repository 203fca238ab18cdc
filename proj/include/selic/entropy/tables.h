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
#ifndef SELIC_ENTROPY_TABLES_H_
#define SELIC_ENTROPY_TABLES_H_

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>

#include "selic/codec/segment.h"

namespace selic::entropy {

// freq_i = 1 + floor(p_i * (65536 - n)) after normalizing p to unit sum;
// the rounding residual goes to the most probable bin. Every bin keeps a
// nonzero frequency.
codec::CdfTable QuantizeToCdf(std::span<const double> probabilities);

// Half-width of the coded alphabet for a zero-mean residual with scale
// sigma: min(levels, ceil(6 sigma) + 1). Mass beyond +-(K - 1/2) is below
// 2e-9 when K is not clamped.
int GaussianExtent(double sigma, int levels);

// Table over [-K, K] for round(y - mu) under N(0, sigma), tail mass folded
// into the extremes.
codec::BoundedTable BuildGaussianTable(double sigma, int levels);

// Deduplicates tables by the exact sigma value. Pointers stay valid for the
// lifetime of the cache.
class GaussianTableCache {
 public:
  explicit GaussianTableCache(int levels) : levels_(levels) {}

  const codec::BoundedTable* Get(float sigma);
  size_t size() const { return tables_.size(); }

 private:
  int levels_;
  std::unordered_map<uint32_t, std::unique_ptr<codec::BoundedTable>> tables_;
};

}  // namespace selic::entropy

#endif  // SELIC_ENTROPY_TABLES_H_
