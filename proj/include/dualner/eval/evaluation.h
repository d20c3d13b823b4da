// dualner/eval/evaluation.h

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

#ifndef DUALNER_EVAL_EVALUATION_H_
#define DUALNER_EVAL_EVALUATION_H_

#include <map>
#include <string>
#include <vector>

#include "dualner/data/corpus.h"
#include "dualner/labels/label_algebra.h"
#include "dualner/model/model.h"

namespace dualner {

struct MatchCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  /// Zero when there are no predictions / no gold / P + R == 0.
  double precision() const;
  double recall() const;
  double f1() const;
  MatchCounts &operator+=(const MatchCounts &o);
  bool operator==(const MatchCounts &) const = default;
};

struct ScoreReport {
  MatchCounts total;
  std::map<std::string, MatchCounts> by_language;
  std::map<std::string, MatchCounts> by_class;

  double precision() const { return total.precision(); }
  double recall() const { return total.recall(); }
  double f1() const { return total.f1(); }
  /// key=value lines, fixed order.
  std::string Serialize() const;
};

/// Exact-match counts for one sentence; each gold span is matched at most
/// once.
MatchCounts EntityF1(const std::vector<EntitySpan> &predicted, const std::vector<EntitySpan> &gold);

/// Scores per-sentence predictions against a labeled corpus. Sentence
/// lengths are taken from `gold`. Throws ContractError on count mismatch or
/// unlabeled gold sentences.
ScoreReport ScoreSpans(const std::vector<std::vector<EntitySpan>> &predicted, const Corpus &gold,
                       const TagSet &tagset);

/// Span-head inference: encode, predict_span, PairSpans on the argmax
/// labels. The sequence-labeling head is not consulted.
std::vector<EntitySpan> Decode(ModelParams<float> &params, const Sentence &sentence);
std::vector<std::vector<EntitySpan>> DecodeCorpus(ModelParams<float> &params, const Corpus &corpus,
                                                  int batch_size = 64);

/// Decode plus score.
ScoreReport Evaluate(ModelParams<float> &params, const Corpus &gold, int batch_size = 64);
/// Micro-F1 over the concatenation of several labeled corpora.
ScoreReport EvaluatePooled(ModelParams<float> &params, const std::vector<Corpus> &golds,
                           int batch_size = 64);

/// Decoded corpus: predicted BIO2 labels attached to every sentence.
Corpus Predict(ModelParams<float> &params, const Corpus &corpus, int batch_size = 64);

/// Eval-mode entity representations for every predicted span, corpus order.
std::vector<EntityRepresentation> CollectEntityRepresentations(ModelParams<float> &params,
                                                               const Corpus &corpus,
                                                               int batch_size = 64);

/// Tab-separated export: header line, then one row per entity with
/// language, class, start, end and the 2d components at 6 decimals.
std::string FormatEntityRepresentations(const std::vector<EntityRepresentation> &reps,
                                        const TagSet &tagset, int width);
void DumpEntityRepresentations(ModelParams<float> &params, const Corpus &corpus,
                               const std::string &path);
/// Parses an export back (values rounded to 6 decimals).
std::vector<EntityRepresentation> ReadEntityRepresentations(const std::string &path,
                                                            const TagSet &tagset);

/// Mean Euclidean distance over all pairs of same-class representations
/// from different languages. Zero when there is no such pair.
double CrossLanguageDistance(const std::vector<EntityRepresentation> &reps);

}  // namespace dualner

#endif  // DUALNER_EVAL_EVALUATION_H_
