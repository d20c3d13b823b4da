// dualner/data/synthetic.h

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

#ifndef DUALNER_DATA_SYNTHETIC_H_
#define DUALNER_DATA_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualner/data/corpus.h"
#include "dualner/util/key_value.h"

namespace dualner {

// Synthetic parallel multilingual NER benchmark.
//
// A base lexicon of context words and an entity inventory (entities_per_class
// identities per class, each 1..max_entity_len base tokens) is rendered into
// every pseudo-language through a fixed bijection: a base token is either
// shared (same surface in all languages) or prefixed with the language code.
// Each class owns a few trigger words that precede a mention with
// probability trigger_rate. Dev/test splits are parallel: the same sentence
// skeletons rendered in every language.
struct SynthConfig {
  std::vector<std::string> languages = {"src", "tgt"};  // first one is the source
  std::vector<std::string> classes = {"LOC", "PER", "ORG"};
  std::vector<double> class_weights;  // empty -> uniform
  int context_vocab = 200;
  int entities_per_class = 60;
  int max_entity_len = 3;
  int triggers_per_class = 2;
  int min_len = 5;
  int max_len = 14;
  int max_seq_len = 64;
  double entity_rate = 0.08;  // expected mentions per token
  double trigger_rate = 0.7;
  double shared_entity_rate = 0.4;
  double shared_context_rate = 0.0;
  double shared_trigger_rate = 1.0;
  double zipf_exponent = 1.0;
  int source_train = 1000;
  int target_train = 1000;
  int dev = 300;
  int test = 300;

  /// Throws ConfigError on inconsistent settings.
  void Validate() const;
  static SynthConfig FromKeyValues(const KeyValues &kv);
  KeyValues ToKeyValues() const;
};

class SyntheticLexicon {
 public:
  SyntheticLexicon(const SynthConfig &config, std::uint64_t seed);

  int num_entities(int cls) const;
  /// Base tokens of entity `id` of class `cls`.
  const std::vector<std::string> &EntityBase(int cls, int id) const;
  bool EntityShared(int cls, int id) const;
  std::string ContextBase(int word) const;
  std::string TriggerBase(int cls, int k) const;

  /// Surface form of a base token in `language`.
  std::string Surface(const std::string &base, const std::string &language) const;
  /// Inverse of Surface. Throws DomainError on tokens not from the lexicon.
  std::string Base(const std::string &surface, const std::string &language) const;
  std::vector<std::string> EntitySurface(int cls, int id, const std::string &language) const;
  bool IsShared(const std::string &base) const;
  const SynthConfig &config() const { return config_; }

 private:
  SynthConfig config_;
  std::vector<std::vector<std::vector<std::string>>> entities_;  // [cls][id] -> base tokens
  std::vector<std::vector<bool>> entity_shared_;
  std::unordered_map<std::string, bool> base_shared_;
};

struct SyntheticBenchmark {
  TagSet tagset;
  std::vector<std::string> languages;
  Corpus source_train;               // labeled
  std::vector<Corpus> target_train;  // unlabeled, one per target language
  std::vector<Corpus> dev;           // labeled, one per language (source first)
  std::vector<Corpus> test;
};

SyntheticBenchmark GenerateSynthetic(const SynthConfig &config, std::uint64_t seed);

}  // namespace dualner

#endif  // DUALNER_DATA_SYNTHETIC_H_
