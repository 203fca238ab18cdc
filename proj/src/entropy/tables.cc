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
#include "selic/entropy/tables.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "selic/core/error.h"
#include "selic/nn/ops.h"

namespace selic::entropy {

codec::CdfTable QuantizeToCdf(std::span<const double> probabilities) {
  const size_t n = probabilities.size();
  Require(n >= 1 && n <= codec::kTotalFrequency, ErrorKind::kInvalidInput, "alphabet size out of range");
  double total = 0;
  for (double p : probabilities) {
    Require(std::isfinite(p) && p >= 0, ErrorKind::kNumeric, "probabilities must be finite and non-negative");
    total += p;
  }
  Require(total > 0, ErrorKind::kNumeric, "probabilities sum to zero");
  const double spare = static_cast<double>(codec::kTotalFrequency - n);
  std::vector<uint32_t> freq(n);
  uint64_t used = 0;
  size_t best = 0;
  for (size_t i = 0; i < n; ++i) {
    const double share = std::min(1.0, probabilities[i] / total);
    freq[i] = 1 + static_cast<uint32_t>(std::floor(share * spare));
    used += freq[i];
    if (probabilities[i] > probabilities[best]) best = i;
  }
  // Clamping share to 1 keeps used <= 65536 despite rounding in the sum.
  while (used > codec::kTotalFrequency) {
    const size_t i = static_cast<size_t>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    --freq[i];
    --used;
  }
  freq[best] += static_cast<uint32_t>(codec::kTotalFrequency - used);
  return codec::CdfTable::FromFrequencies(freq);
}

int GaussianExtent(double sigma, int levels) {
  Require(sigma > 0 && std::isfinite(sigma), ErrorKind::kNumeric, "sigma must be positive and finite");
  const double k = std::ceil(6.0 * sigma) + 1.0;
  return k >= levels ? levels : static_cast<int>(k);
}

codec::BoundedTable BuildGaussianTable(double sigma, int levels) {
  const int k = GaussianExtent(sigma, levels);
  std::vector<double> p(2 * k + 1);
  for (int s = -k; s <= k; ++s) {
    const double a = std::abs(s);
    double mass;
    if (s == -k || s == k) {
      mass = nn::NormalCdf((0.5 - a) / sigma);
    } else {
      mass = nn::NormalCdf((0.5 - a) / sigma) - nn::NormalCdf((-0.5 - a) / sigma);
    }
    p[s + k] = mass;
  }
  return codec::BoundedTable{QuantizeToCdf(p), -k};
}

const codec::BoundedTable* GaussianTableCache::Get(float sigma) {
  const uint32_t key = std::bit_cast<uint32_t>(sigma);
  auto it = tables_.find(key);
  if (it == tables_.end()) {
    it = tables_.emplace(key, std::make_unique<codec::BoundedTable>(BuildGaussianTable(sigma, levels_))).first;
  }
  return it->second.get();
}

}  // namespace selic::entropy
