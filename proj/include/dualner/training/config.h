// dualner/training/config.h

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

#ifndef DUALNER_TRAINING_CONFIG_H_
#define DUALNER_TRAINING_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "dualner/model/model.h"
#include "dualner/util/key_value.h"

namespace dualner {

enum class Variant {
  kDualNer,  // full objective
  kMlt,      // Stage 1 only
  kSelfKl,   // same-head KL distillation instead of crosswise pseudo labels
  kNoMse,    // no representation regularizer
  kNoTrg,    // no target-language data in Stage 2
};

/// Throws ConfigError on unknown names.
Variant ParseVariant(std::string_view name);
const char *VariantName(Variant v);

struct TrainConfig {
  double alpha = 0.5;
  int batch_size = 32;
  int epochs = 8;
  int warmup = 30;
  double lr = 1e-3;
  int eval_interval = 50;
  std::uint64_t seed = 1;
  int stage = 1;
  Variant variant = Variant::kDualNer;
  double source_fraction = 1.0;
  int max_len = 64;
  int eval_batch = 64;
  // Encoder shape (vocab_size comes from the data).
  int d_model = 64;
  int layers = 2;
  int heads = 2;
  int ffn = 128;
  double dropout = 0.1;
  double word_dropout = 0.1;

  /// Gold / pseudo mixing weight on the source side; fixed.
  static constexpr double kSourceMix = 0.5;

  /// Batch 128, warmup 300, lr 2e-5, evaluation every 250 steps.
  static TrainConfig LargeScale();

  /// Throws ConfigError.
  void Validate() const;
  EncoderConfig Encoder(int vocab_size) const;

  /// Keys not present keep the values of `base`. Unknown keys are rejected.
  static TrainConfig FromKeyValues(const KeyValues &kv, const TrainConfig &base);
  static TrainConfig FromKeyValues(const KeyValues &kv);
  KeyValues ToKeyValues() const;
};

}  // namespace dualner

#endif  // DUALNER_TRAINING_CONFIG_H_
