// training/config.cc

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

#include "dualner/training/config.h"

#include "dualner/util/error.h"

namespace dualner {

Variant ParseVariant(std::string_view name) {
  if (name == "dualner") return Variant::kDualNer;
  if (name == "mlt") return Variant::kMlt;
  if (name == "self_kl") return Variant::kSelfKl;
  if (name == "no_mse") return Variant::kNoMse;
  if (name == "no_trg") return Variant::kNoTrg;
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

const char *VariantName(Variant v) {
  switch (v) {
    case Variant::kDualNer: return "dualner";
    case Variant::kMlt: return "mlt";
    case Variant::kSelfKl: return "self_kl";
    case Variant::kNoMse: return "no_mse";
    case Variant::kNoTrg: return "no_trg";
  }
  return "?";
}

TrainConfig TrainConfig::LargeScale() {
  TrainConfig c;
  c.batch_size = 128;
  c.warmup = 300;
  c.lr = 2e-5;
  c.eval_interval = 250;
  return c;
}

void TrainConfig::Validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (stage == 2 && batch_size < 2) throw ConfigError("stage 2 needs batch_size >= 2");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (warmup < 0) throw ConfigError("warmup must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (stage != 1 && stage != 2) throw ConfigError("stage must be 1 or 2");
  if (!(source_fraction > 0.0 && source_fraction <= 1.0))
    throw ConfigError("source_fraction must be in (0, 1]");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  if (eval_batch < 1) throw ConfigError("eval_batch must be >= 1");
  Encoder(2).Validate();
}

EncoderConfig TrainConfig::Encoder(int vocab_size) const {
  EncoderConfig e;
  e.vocab_size = vocab_size;
  e.d_model = d_model;
  e.layers = layers;
  e.heads = heads;
  e.ffn = ffn;
  e.max_len = max_len;
  e.dropout = dropout;
  e.word_dropout = word_dropout;
  return e;
}

TrainConfig TrainConfig::FromKeyValues(const KeyValues &kv, const TrainConfig &base) {
  kv.RejectUnknown({"alpha", "batch_size", "epochs", "warmup", "lr", "eval_interval", "seed",
                    "stage", "variant", "source_fraction", "max_len", "eval_batch", "d_model",
                    "layers", "heads", "ffn", "dropout", "word_dropout"});
  TrainConfig c = base;
  c.alpha = kv.GetDouble("alpha", c.alpha);
  c.batch_size = static_cast<int>(kv.GetInt("batch_size", c.batch_size));
  c.epochs = static_cast<int>(kv.GetInt("epochs", c.epochs));
  c.warmup = static_cast<int>(kv.GetInt("warmup", c.warmup));
  c.lr = kv.GetDouble("lr", c.lr);
  c.eval_interval = static_cast<int>(kv.GetInt("eval_interval", c.eval_interval));
  c.seed = kv.GetUint64("seed", c.seed);
  c.stage = static_cast<int>(kv.GetInt("stage", c.stage));
  c.variant = ParseVariant(kv.GetString("variant", VariantName(c.variant)));
  c.source_fraction = kv.GetDouble("source_fraction", c.source_fraction);
  c.max_len = static_cast<int>(kv.GetInt("max_len", c.max_len));
  c.eval_batch = static_cast<int>(kv.GetInt("eval_batch", c.eval_batch));
  c.d_model = static_cast<int>(kv.GetInt("d_model", c.d_model));
  c.layers = static_cast<int>(kv.GetInt("layers", c.layers));
  c.heads = static_cast<int>(kv.GetInt("heads", c.heads));
  c.ffn = static_cast<int>(kv.GetInt("ffn", c.ffn));
  c.dropout = kv.GetDouble("dropout", c.dropout);
  c.word_dropout = kv.GetDouble("word_dropout", c.word_dropout);
  c.Validate();
  return c;
}

TrainConfig TrainConfig::FromKeyValues(const KeyValues &kv) {
  return FromKeyValues(kv, TrainConfig());
}

KeyValues TrainConfig::ToKeyValues() const {
  KeyValues kv;
  kv.Set("alpha", FormatDouble(alpha));
  kv.Set("batch_size", std::to_string(batch_size));
  kv.Set("epochs", std::to_string(epochs));
  kv.Set("warmup", std::to_string(warmup));
  kv.Set("lr", FormatDouble(lr));
  kv.Set("eval_interval", std::to_string(eval_interval));
  kv.Set("seed", std::to_string(seed));
  kv.Set("stage", std::to_string(stage));
  kv.Set("variant", VariantName(variant));
  kv.Set("source_fraction", FormatDouble(source_fraction));
  kv.Set("max_len", std::to_string(max_len));
  kv.Set("eval_batch", std::to_string(eval_batch));
  kv.Set("d_model", std::to_string(d_model));
  kv.Set("layers", std::to_string(layers));
  kv.Set("heads", std::to_string(heads));
  kv.Set("ffn", std::to_string(ffn));
  kv.Set("dropout", FormatDouble(dropout));
  kv.Set("word_dropout", FormatDouble(word_dropout));
  return kv;
}

}  // namespace dualner
