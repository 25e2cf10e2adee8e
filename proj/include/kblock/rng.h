// Copyright 2026 The kblock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pinned pseudo-random machinery. Every shuffle, sample and side assignment in
// kblock goes through this header so that results are identical across runs,
// compilers and platforms. Nothing here uses <random> distributions, whose
// output is implementation-defined.
//
//   * Generator: xoshiro256** 1.0 (Blackman & Vigna), state seeded by four
//     successive SplitMix64 outputs of the 64-bit seed.
//   * Bounded integers: Lemire's multiply-shift with rejection (unbiased).
//   * Seed derivation: FNV-1a 64 over the key bytes, each field folded in with
//     a SplitMix64 finalizer.

#ifndef KBLOCK_RNG_H_
#define KBLOCK_RNG_H_

#include <array>
#include <cstdint>
#include <string_view>

namespace kblock {

// One step of SplitMix64; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

// Stateless SplitMix64 finalizer (the mixing stage only).
std::uint64_t mix64(std::uint64_t x);

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

 private:
  std::array<std::uint64_t, 4> s_;
};

// Per-item seed: hash of (run_seed, key, k). Used as
// seed = derive_seed(run_seed, doc_id, k) so that adding or removing a
// document never perturbs another document's shuffle.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key,
                          std::uint64_t k);

// Same, with an extra salt (sample index, purpose tag).
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key,
                          std::uint64_t k, std::uint64_t salt);

}  // namespace kblock

#endif  // KBLOCK_RNG_H_
