// dualner/training/losses.h

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

#ifndef DUALNER_TRAINING_LOSSES_H_
#define DUALNER_TRAINING_LOSSES_H_

#include <optional>
#include <vector>

#include "dualner/model/model.h"
#include "dualner/training/config.h"

namespace dualner {

/// Hard targets for both label views of one sentence.
struct Targets {
  LabelSequence sla;
  SpanLabelPair span;
};

/// Gold targets: BIO2 labels and their start/end extraction.
Targets GoldTargets(const LabelSequence &labels, const TagSet &tagset);

/// Crosswise pseudo labels from one sentence's predictions:
/// sla = Sequential(P_start, P_end), span = ExtractSpan(P_sla).
Targets PseudoTargets(const PredictionTriple &pred);

/// Token-mean cross-entropy per head.
struct HeadLosses {
  double sla = 0.0;
  double start = 0.0;
  double end = 0.0;
  double sum() const { return sla + start + end; }
};

struct LossReport {
  Variant variant = Variant::kDualNer;
  double alpha = 0.0;
  HeadLosses gold;        // source sentences, gold targets
  HeadLosses src_teach;   // source sentences, pseudo targets (KL for self_kl)
  HeadLosses trg_teach;   // target sentences, pseudo targets (KL for self_kl)
  double j_src = 0.0;
  double j_trg = 0.0;
  double j_mse = 0.0;
  double j_total = 0.0;
  int source_sentences = 0;
  int target_sentences = 0;
  int source_tokens = 0;
  int target_tokens = 0;
  int entities = 0;  // representations entering the regularizer
  bool stage1 = false;
};

/// Recomputes the total from the component fields under the report's
/// variant. Throws ConfigError for mlt outside Stage 1.
double TotalLoss(const LossReport &report, double alpha, Variant variant);

/// Sum of the three head losses against `targets` (one entry per sentence
/// of the pass; nullopt rows are excluded). Token mean over the included
/// rows; a constant 0 when none are included.
template <typename Real>
Var<Real> MultitaskLoss(Graph<Real> &g, const ForwardPass<Real> &pass,
                        const std::vector<std::optional<Targets>> &targets, HeadLosses *out);

/// Stage-1 objective on a gold batch. Throws ContractError when a sentence
/// has no gold labels.
template <typename Real>
Var<Real> Stage1Loss(Graph<Real> &g, ModelParams<Real> &params, const Batch &batch,
                     const ForwardOptions &options, LossReport *report);

/// Teacher predictions in eval mode (no dropout, no gradient).
template <typename Real>
std::vector<PredictionTriple> TeacherPredictions(ModelParams<Real> &teacher, const Batch &batch);

/// Crosswise pseudo labels for every sentence of the batch from the
/// current teacher.
template <typename Real>
std::vector<Targets> MakePseudoLabels(ModelParams<Real> &teacher, const Batch &batch);

/// J_src = 0.5 MT(gold) + 0.5 MT(pseudo) over source sentences and
/// J_trg = MT(pseudo) over target sentences. Fills j_src, j_trg, gold,
/// src_teach, trg_teach. Throws ContractError on missing labels.
template <typename Real>
std::pair<Var<Real>, Var<Real>> DualTeachingLoss(Graph<Real> &g, const ForwardPass<Real> &pass,
                                                 const Batch &batch, const TagSet &tagset,
                                                 const std::vector<Targets> &pseudo,
                                                 LossReport *report);

/// (1/C) sum_c (1/|R_c|) sum_{m != q} mean_dim((r_m - r_q)^2) with
/// r = concat(h_start, h_end). Classes with fewer than two members add 0.
template <typename Real>
Var<Real> EntityMseLoss(Graph<Real> &g, const EncodedBatch<Real> &encoded,
                        const std::vector<std::vector<EntitySpan>> &spans, int num_classes);

/// Same formula evaluated directly on extracted representations.
double EntityMseValue(const std::vector<EntityRepresentation> &reps, int num_classes);

/// Token-mean KL(teacher || student), summed over the three heads, on the
/// rows of sentences with `include[b]`. `teacher` holds the teacher
/// distributions per sentence.
template <typename Real>
Var<Real> SelfKlLoss(Graph<Real> &g, const ForwardPass<Real> &student,
                     const std::vector<PredictionTriple> &teacher,
                     const std::vector<bool> &include, HeadLosses *out);

/// Stage-2 objective for `config.variant`:
///   J = J_src + J_trg + alpha J_mse
/// with the variant-specific terms dropped or replaced. The regularizer
/// uses the student's own argmax spans unless `pinned_spans` is given.
template <typename Real>
Var<Real> Stage2Loss(Graph<Real> &g, ModelParams<Real> &student, ModelParams<Real> &teacher,
                     const Batch &batch, double alpha, Variant variant,
                     const ForwardOptions &options, LossReport *report,
                     const std::vector<std::vector<EntitySpan>> *pinned_spans = nullptr);

}  // namespace dualner

#endif  // DUALNER_TRAINING_LOSSES_H_
