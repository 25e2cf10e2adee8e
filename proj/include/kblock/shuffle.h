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

// k-block shuffling: partition a document into contiguous runs of k
// sentences and reorder the runs with a seeded, non-identity permutation.
// k = 1 is the classic sentence-level shuffle.

#ifndef KBLOCK_SHUFFLE_H_
#define KBLOCK_SHUFFLE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kblock/corpus.h"

namespace kblock {

struct BlockPartition {
  std::string doc_id;
  std::size_t k = 1;
  // blocks[j] covers sentence indices [j*k, min((j+1)*k, n)).
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t num_blocks() const { return blocks.size(); }
};

using Permutation = std::vector<std::size_t>;

struct ShuffleInstance {
  Document original;
  Document shuffled;
  std::size_t k = 1;
  Permutation permutation;  // shuffled block i is original block permutation[i]
  std::uint64_t seed = 0;
};

// Error text shared by every "cannot shuffle" path.
inline constexpr const char* kUnshufflable = "un-shufflable: single block";

BlockPartition partition_blocks(const Document& doc, std::size_t k);

// Number of blocks partition_blocks would produce: ceil(n / k).
std::size_t num_blocks(std::size_t num_sentences, std::size_t k);

// Fisher-Yates over [0, num_blocks) driven by Xoshiro256(seed); an identity
// draw is rejected and redrawn from the same stream, at most max_retries
// times in total before failing with "identity resample limit".
Permutation shuffle_blocks(std::size_t num_blocks, std::uint64_t seed,
                           std::size_t max_retries = 64);
Permutation shuffle_blocks(const BlockPartition& partition, std::uint64_t seed,
                           std::size_t max_retries = 64);

bool is_identity(const Permutation& perm);

// Reassembles doc with the given block order. Throws if perm is not a
// permutation of the partition's blocks.
Document apply_permutation(const Document& doc, const BlockPartition& partition,
                           const Permutation& perm);

ShuffleInstance make_instance(const Document& doc, std::size_t k,
                              std::uint64_t seed);

// Instance with a caller-chosen permutation (must be non-identity).
ShuffleInstance make_instance_with_permutation(const Document& doc, std::size_t k,
                                               const Permutation& perm,
                                               std::uint64_t seed = 0);

// {"doc_id","k","seed","permutation","original_sentences","shuffled_sentences"}
nlohmann::json to_json(const ShuffleInstance& inst);
ShuffleInstance instance_from_json(const nlohmann::json& j);

}  // namespace kblock

#endif  // KBLOCK_SHUFFLE_H_
