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

#include "kblock/shuffle.h"

#include <algorithm>
#include <numeric>

#include "kblock/error.h"
#include "kblock/rng.h"

namespace kblock {

std::size_t num_blocks(std::size_t num_sentences, std::size_t k) {
  if (k == 0) throw Error("block size must be positive");
  return (num_sentences + k - 1) / k;
}

BlockPartition partition_blocks(const Document& doc, std::size_t k) {
  if (k == 0) throw Error("block size must be positive");
  if (doc.sentences.empty()) throw Error("empty document");
  BlockPartition p;
  p.doc_id = doc.id;
  p.k = k;
  const std::size_t n = doc.sentences.size();
  for (std::size_t start = 0; start < n; start += k) {
    std::vector<std::size_t> block(std::min(k, n - start));
    std::iota(block.begin(), block.end(), start);
    p.blocks.push_back(std::move(block));
  }
  return p;
}

bool is_identity(const Permutation& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != i) return false;
  }
  return true;
}

Permutation shuffle_blocks(std::size_t num_blocks, std::uint64_t seed,
                           std::size_t max_retries) {
  if (num_blocks < 2) throw Error(kUnshufflable);
  Xoshiro256 rng(seed);
  Permutation perm(num_blocks);
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = num_blocks - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    if (!is_identity(perm)) return perm;
  }
  throw Error("identity resample limit");
}

Permutation shuffle_blocks(const BlockPartition& partition, std::uint64_t seed,
                           std::size_t max_retries) {
  return shuffle_blocks(partition.num_blocks(), seed, max_retries);
}

Document apply_permutation(const Document& doc, const BlockPartition& partition,
                           const Permutation& perm) {
  const std::size_t m = partition.num_blocks();
  std::vector<bool> used(m, false);
  if (perm.size() != m) throw Error("permutation size does not match block count");
  Document out;
  out.id = doc.id;
  out.source_meta = doc.source_meta;
  out.sentences.reserve(doc.sentences.size());
  for (std::size_t b : perm) {
    if (b >= m || used[b]) throw Error("not a permutation of the blocks");
    used[b] = true;
    for (std::size_t idx : partition.blocks[b]) out.sentences.push_back(doc.sentences[idx]);
  }
  return out;
}

ShuffleInstance make_instance_with_permutation(const Document& doc, std::size_t k,
                                               const Permutation& perm,
                                               std::uint64_t seed) {
  const BlockPartition partition = partition_blocks(doc, k);
  if (partition.num_blocks() < 2) throw Error(kUnshufflable);
  if (is_identity(perm)) throw Error("identity permutation");
  ShuffleInstance inst;
  inst.shuffled = apply_permutation(doc, partition, perm);
  inst.original = doc;
  inst.k = k;
  inst.permutation = perm;
  inst.seed = seed;
  return inst;
}

ShuffleInstance make_instance(const Document& doc, std::size_t k, std::uint64_t seed) {
  const BlockPartition partition = partition_blocks(doc, k);
  const Permutation perm = shuffle_blocks(partition, seed);
  ShuffleInstance inst;
  inst.shuffled = apply_permutation(doc, partition, perm);
  inst.original = doc;
  inst.k = k;
  inst.permutation = perm;
  inst.seed = seed;
  return inst;
}

nlohmann::json to_json(const ShuffleInstance& inst) {
  nlohmann::json j;
  j["doc_id"] = inst.original.id;
  j["k"] = inst.k;
  j["seed"] = inst.seed;
  j["permutation"] = inst.permutation;
  auto texts = [](const Document& d) {
    std::vector<std::string> out;
    for (const auto& s : d.sentences) out.push_back(s.text);
    return out;
  };
  j["original_sentences"] = texts(inst.original);
  j["shuffled_sentences"] = texts(inst.shuffled);
  return j;
}

ShuffleInstance instance_from_json(const nlohmann::json& j) {
  try {
    const auto id = j.at("doc_id").get<std::string>();
    const auto k = j.at("k").get<std::size_t>();
    const auto perm = j.at("permutation").get<Permutation>();
    const Document doc =
        make_document(id, j.at("original_sentences").get<std::vector<std::string>>());
    ShuffleInstance inst =
        make_instance_with_permutation(doc, k, perm, j.at("seed").get<std::uint64_t>());
    std::vector<std::string> expected;
    for (const auto& s : inst.shuffled.sentences) expected.push_back(s.text);
    if (expected != j.at("shuffled_sentences").get<std::vector<std::string>>()) {
      throw Error("shuffled_sentences inconsistent with permutation");
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed shuffle instance: ") + e.what());
  }
}

}  // namespace kblock
