// dualner/model/model.h

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

#ifndef DUALNER_MODEL_MODEL_H_
#define DUALNER_MODEL_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dualner/data/batching.h"
#include "dualner/data/corpus.h"
#include "dualner/labels/label_algebra.h"
#include "dualner/numerics/autodiff.h"

namespace dualner {

// Token representation layer: token embedding (scaled by sqrt(d)) plus
// sinusoidal positions, then pre-norm transformer blocks (self-attention
// and a GELU feed-forward, each wrapped in a residual), then a final layer
// norm. Sequence-labeling and span heads are single linear maps on the
// final states.
struct EncoderConfig {
  int vocab_size = 0;
  int d_model = 64;
  int layers = 2;
  int heads = 2;
  int ffn = 128;
  int max_len = 64;
  double dropout = 0.1;
  /// Training-mode rate of replacing a token id by the unknown id.
  double word_dropout = 0.1;

  /// Throws ConfigError.
  void Validate() const;
  bool operator==(const EncoderConfig &) const = default;
};

template <typename Real>
struct BlockParams {
  Parameter<Real> ln1_gain, ln1_bias;
  Parameter<Real> wq, bq, wk, bk, wv, bv, wo, bo;
  Parameter<Real> ln2_gain, ln2_bias;
  Parameter<Real> w1, b1, w2, b2;
};

/// Encoder parameters plus the three classifier heads, with the vocabulary
/// and tag set the heads were sized for.
template <typename Real>
struct ModelParams {
  EncoderConfig config;
  TagSet tagset;
  Vocabulary vocab;

  Parameter<Real> embedding;
  std::vector<BlockParams<Real>> blocks;
  Parameter<Real> final_gain, final_bias;
  Parameter<Real> sla_w, sla_b;      // d -> 2C+1
  Parameter<Real> start_w, start_b;  // d -> C+1
  Parameter<Real> end_w, end_b;      // d -> C+1

  /// Every parameter in a fixed order (checkpoint order).
  std::vector<Parameter<Real> *> All();
  std::vector<const Parameter<Real> *> All() const;
  void ZeroGrad();

  template <typename Other>
  ModelParams<Other> Cast() const;
};

/// Seeded initialization: U(-0.1, 0.1) embeddings, N(0, 1/fan_in) weight
/// matrices, zero biases, unit layer-norm gains.
template <typename Real>
ModelParams<Real> InitModel(const EncoderConfig &config, const TagSet &tagset,
                            const Vocabulary &vocab, std::uint64_t seed);

struct ForwardOptions {
  bool train = false;  // dropout on
  std::uint64_t dropout_seed = 0;
};

template <typename Real>
struct EncodedBatch {
  Var<Real> hidden;               // [total tokens, d], sentences packed
  std::vector<Segment> segments;  // one per sentence
};

template <typename Real>
struct ForwardPass {
  EncodedBatch<Real> encoded;
  Var<Real> sla_logits;    // [T, 2C+1]
  Var<Real> start_logits;  // [T, C+1]
  Var<Real> end_logits;    // [T, C+1]
};

/// Throws DomainError on token ids outside the vocabulary.
template <typename Real>
EncodedBatch<Real> Encode(Graph<Real> &g, ModelParams<Real> &p, const Batch &batch,
                          const ForwardOptions &options);
template <typename Real>
Var<Real> SlaLogits(Graph<Real> &g, ModelParams<Real> &p, const Var<Real> &hidden);
template <typename Real>
std::pair<Var<Real>, Var<Real>> SpanLogits(Graph<Real> &g, ModelParams<Real> &p,
                                           const Var<Real> &hidden);
template <typename Real>
ForwardPass<Real> Forward(Graph<Real> &g, ModelParams<Real> &p, const Batch &batch,
                          const ForwardOptions &options);

/// Hidden states laid out as [batch, width, d] with zeros on padding.
template <typename Real>
BasicTensor<Real> PaddedHidden(const EncodedBatch<Real> &encoded, const Batch &batch);

/// Per-sentence output distributions (P_sla, P_start, P_end).
struct PredictionTriple {
  Tensor sla;    // [n, 2C+1]
  Tensor start;  // [n, C+1]
  Tensor end;    // [n, C+1]

  int length() const { return sla.rows(); }
};

/// Row softmax of logits, one triple per sentence of the pass.
template <typename Real>
std::vector<PredictionTriple> Predictions(const ForwardPass<Real> &pass);

struct EntityRepresentation {
  std::vector<float> vector;  // concat(h_start, h_end), width 2d
  int cls = 0;
  std::string language;
  EntitySpan span;
  int sentence = 0;  // index within the batch
};

/// Spans from PairSpans over the argmax of (P_start, P_end), one list per
/// sentence.
std::vector<std::vector<EntitySpan>> PredictedSpans(const std::vector<PredictionTriple> &preds);

template <typename Real>
std::vector<EntityRepresentation> EntityRepresentations(
    const EncodedBatch<Real> &encoded, const Batch &batch,
    const std::vector<PredictionTriple> &preds);

/// Appends tokens of `corpora` missing from the vocabulary. New embedding
/// rows start as copies of the unknown-token row, so predictions do not
/// change.
void ExtendVocabulary(ModelParams<float> &p, const std::vector<const Corpus *> &corpora);

/// Convenience: eval-mode forward over a batch, no gradient bookkeeping.
std::vector<PredictionTriple> PredictBatch(ModelParams<float> &p, const Batch &batch);

}  // namespace dualner

#endif  // DUALNER_MODEL_MODEL_H_
