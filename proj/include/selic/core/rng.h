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
#ifndef SELIC_CORE_RNG_H_
#define SELIC_CORE_RNG_H_

#include <cstdint>
#include <random>
#include <span>

namespace selic {

// splitmix64 step; advances `state`.
uint64_t SplitMix64(uint64_t& state);

// Derives an independent stream seed from a base seed and a tag.
uint64_t DeriveSeed(uint64_t base, uint64_t tag);

uint64_t Fnv1a64(std::span<const uint8_t> bytes, uint64_t basis = 0xcbf29ce484222325ull);

// Portable random source: the engine output sequence is fixed by the standard
// and the conversions below avoid implementation-defined distributions, so
// the same seed gives the same numbers on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n);
  double Normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace selic

#endif  // SELIC_CORE_RNG_H_
