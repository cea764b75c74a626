// Copyright 2026 The aggmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AGGMIA_RANDOM_H_
#define AGGMIA_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace aggmia {

// SplitMix64 finalizer. Bijective on 64-bit words.
uint64_t Mix64(uint64_t x);

// Derives a child seed from `parent` and an ordered path of counters.
// The scheme is Mix64 folding: h = Mix64(parent); h = Mix64(h ^ Mix64(c + i*phi))
// for each path element. Distinct paths give statistically independent
// streams, and appending a new path never perturbs existing ones.
uint64_t DeriveSeed(uint64_t parent, std::initializer_list<uint64_t> path);

// Maps 64 random bits to a double in the open interval (0, 1).
inline double BitsToOpenUnit(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse-CDF Laplace(0, scale) sample from 64 random bits.
double LaplaceFromBits(uint64_t bits, double scale);

// Counter-based uniform bits: the `counter`-th word of the stream keyed by
// `key`. Used for per-entry noise so that entries can be filled in any order.
inline uint64_t CounterBits(uint64_t key, uint64_t counter) {
  return Mix64(key ^ Mix64(counter + 0x9e3779b97f4a7c15ULL));
}

// xoshiro256** generator with explicit, platform-independent conversions.
// Distribution code never goes through <random> distributions, whose
// outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t NextU64();
  // Uniform in [0, 1).
  double Uniform();
  // Uniform in (0, 1).
  double OpenUniform() { return BitsToOpenUnit(NextU64()); }
  // Uniform integer in [0, n). Requires n > 0.
  uint64_t UniformInt(uint64_t n);
  double Exponential(double mean);
  double StandardNormal();
  double Laplace(double scale) { return LaplaceFromBits(NextU64(), scale); }

  // Draws one word and returns a generator seeded from it. The child stream
  // is independent of the parent's subsequent output.
  Rng Fork();
  // Draws one word to use as a substream key (see CounterBits / DeriveSeed).
  uint64_t NextKey() { return NextU64(); }

 private:
  uint64_t s_[4];
};

// Walker alias table for O(1) sampling from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;
  // Weights must be nonnegative with a positive sum.
  explicit AliasTable(std::span<const double> weights);

  std::size_t Sample(Rng& rng) const;
  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<uint32_t> alias_;
};

// Samples an index proportional to `weights` by a linear scan. Intended for
// short vectors. Weights must have a positive sum.
std::size_t SampleLinear(std::span<const double> weights, Rng& rng);

// Uniform random k-subset of {0..n-1}, returned in increasing order.
std::vector<std::size_t> SampleWithoutReplacement(std::size_t n, std::size_t k,
                                                  Rng& rng);

}  // namespace aggmia

#endif  // AGGMIA_RANDOM_H_
