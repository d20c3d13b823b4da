// dualner/data/batching.h

// Copyright 2026  The DualNER Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DUALNER_DATA_BATCHING_H_
#define DUALNER_DATA_BATCHING_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dualner/data/corpus.h"

namespace dualner {

/// Padded mini-batch. Row b of `token_ids`/`mask` holds sentence b,
/// `width` columns wide.
struct Batch {
  int width = 0;
  std::vector<int> token_ids;
  std::vector<std::uint8_t> mask;  // 1 on real tokens, 0 on padding
  std::vector<int> lengths;
  std::vector<std::string> languages;
  std::vector<Role> roles;
  std::vector<std::optional<LabelSequence>> gold;

  int size() const { return static_cast<int>(lengths.size()); }
  int num_tokens() const;
  int num_role(Role r) const;
};

/// Builds one batch, truncating sentences (and their labels) to `max_len`.
/// Tokens are mapped through `vocab`; labels of target-role sentences are
/// never attached.
Batch MakeBatch(const std::vector<const Sentence *> &sentences, const std::vector<Role> &roles,
                const Vocabulary &vocab, int max_len);

enum class MixingPolicy {
  /// Source sentences only, reshuffled every epoch.
  kSourceOnly,
  /// Half of every batch (rounded up) from the source pool, the rest from
  /// the target pool. The larger pool is traversed once per epoch; the
  /// smaller one is reshuffled and cycled. Empty target pool degrades to
  /// kSourceOnly.
  kHalfSource,
};

/// Fisher-Yates with raw mt19937_64 draws, identical across platforms.
void DeterministicShuffle(std::vector<std::size_t> &items, std::mt19937_64 &rng);

/// Mini-batches of one epoch. Throws ContractError on an empty source pool,
/// on batch_size < 1, or on batch_size < 2 under kHalfSource.
std::vector<Batch> MakeBatches(const std::vector<const Corpus *> &source,
                               const std::vector<const Corpus *> &target, int batch_size,
                               MixingPolicy policy, std::uint64_t seed, int epoch,
                               const Vocabulary &vocab, int max_len);

/// Deterministic split of a labeled corpus into a kept fraction and the
/// remainder (labels dropped), used by the corpus-size sweep.
struct SourceSplit {
  Corpus labeled;
  Corpus unlabeled_rest;
};
SourceSplit SelectSourceFraction(const Corpus &source, double fraction, std::uint64_t seed);

}  // namespace dualner

#endif  // DUALNER_DATA_BATCHING_H_
