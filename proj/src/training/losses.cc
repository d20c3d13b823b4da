// training/losses.cc

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

#include "dualner/training/losses.h"

#include <cmath>

#include "dualner/util/error.h"

namespace dualner {

Targets GoldTargets(const LabelSequence &labels, const TagSet &tagset) {
  return {labels, ExtractSpanLabels(labels, tagset)};
}

Targets PseudoTargets(const PredictionTriple &pred) {
  return {Sequential(pred.start, pred.end), ExtractSpan(pred.sla)};
}

double TotalLoss(const LossReport &r, double alpha, Variant variant) {
  if (r.stage1) return r.gold.sum();
  const double m = TrainConfig::kSourceMix;
  const double j_src = m * r.gold.sum() + (1.0 - m) * r.src_teach.sum();
  const double j_trg = r.trg_teach.sum();
  switch (variant) {
    case Variant::kDualNer:
    case Variant::kSelfKl:
      return j_src + j_trg + alpha * r.j_mse;
    case Variant::kNoMse:
      return j_src + j_trg;
    case Variant::kNoTrg:
      return j_src + alpha * r.j_mse;
    case Variant::kMlt:
      break;
  }
  throw ConfigError("variant mlt has no Stage-2 objective");
}

namespace {

template <typename Real>
Var<Real> Zero(Graph<Real> &g) {
  return g.Constant(BasicTensor<Real>::Scalar(Real(0)));
}

// Per-row weights 1/N over the included sentences' rows.
std::vector<double> RowWeights(const std::vector<Segment> &segments, const std::vector<bool> &include,
                               int total_rows, int *tokens) {
  int n = 0;
  for (std::size_t b = 0; b < segments.size(); ++b)
    if (include[b]) n += segments[b].length;
  *tokens = n;
  std::vector<double> w(total_rows, 0.0);
  if (n == 0) return w;
  for (std::size_t b = 0; b < segments.size(); ++b) {
    if (!include[b]) continue;
    for (int t = 0; t < segments[b].length; ++t) w[segments[b].begin + t] = 1.0 / n;
  }
  return w;
}

}  // namespace

template <typename Real>
Var<Real> MultitaskLoss(Graph<Real> &g, const ForwardPass<Real> &pass,
                        const std::vector<std::optional<Targets>> &targets, HeadLosses *out) {
  const auto &segs = pass.encoded.segments;
  if (targets.size() != segs.size()) throw ContractError("one target entry per sentence required");
  const int total = pass.sla_logits.value().rows();
  std::vector<bool> include(segs.size());
  std::vector<int> sla(total, 0), start(total, 0), end(total, 0);
  for (std::size_t b = 0; b < segs.size(); ++b) {
    include[b] = targets[b].has_value();
    if (!include[b]) continue;
    const Targets &t = *targets[b];
    const std::size_t n = segs[b].length;
    if (t.sla.size() != n || t.span.start.size() != n || t.span.end.size() != n)
      throw ContractError("target length does not match sentence length");
    for (std::size_t i = 0; i < n; ++i) {
      sla[segs[b].begin + i] = t.sla[i];
      start[segs[b].begin + i] = t.span.start[i];
      end[segs[b].begin + i] = t.span.end[i];
    }
  }
  int tokens = 0;
  const auto w = RowWeights(segs, include, total, &tokens);
  if (tokens == 0) {
    if (out) *out = HeadLosses{};
    return Zero(g);
  }
  Var<Real> ls = SoftmaxCrossEntropy(pass.sla_logits, sla, w);
  Var<Real> lb = SoftmaxCrossEntropy(pass.start_logits, start, w);
  Var<Real> le = SoftmaxCrossEntropy(pass.end_logits, end, w);
  if (out) *out = {double(ls.scalar()), double(lb.scalar()), double(le.scalar())};
  return Add(Add(ls, lb), le);
}

template <typename Real>
Var<Real> Stage1Loss(Graph<Real> &g, ModelParams<Real> &params, const Batch &batch,
                     const ForwardOptions &options, LossReport *report) {
  std::vector<std::optional<Targets>> targets;
  for (int b = 0; b < batch.size(); ++b) {
    if (!batch.gold[b]) throw ContractError("Stage-1 batch sentence without gold labels");
    targets.emplace_back(GoldTargets(*batch.gold[b], params.tagset));
  }
  const ForwardPass<Real> pass = Forward(g, params, batch, options);
  LossReport r;
  r.stage1 = true;
  r.variant = Variant::kMlt;
  Var<Real> loss = MultitaskLoss(g, pass, targets, &r.gold);
  r.source_sentences = batch.size();
  r.source_tokens = batch.num_tokens();
  r.j_src = r.gold.sum();
  r.j_total = double(loss.scalar());
  if (report) *report = r;
  return loss;
}

template <typename Real>
std::vector<PredictionTriple> TeacherPredictions(ModelParams<Real> &teacher, const Batch &batch) {
  Graph<Real> g(false);
  return Predictions(Forward(g, teacher, batch, ForwardOptions{}));
}

template <typename Real>
std::vector<Targets> MakePseudoLabels(ModelParams<Real> &teacher, const Batch &batch) {
  std::vector<Targets> out;
  for (const auto &p : TeacherPredictions(teacher, batch)) out.push_back(PseudoTargets(p));
  return out;
}

template <typename Real>
std::pair<Var<Real>, Var<Real>> DualTeachingLoss(Graph<Real> &g, const ForwardPass<Real> &pass,
                                                 const Batch &batch, const TagSet &tagset,
                                                 const std::vector<Targets> &pseudo,
                                                 LossReport *report) {
  const int n = batch.size();
  if (static_cast<int>(pseudo.size()) != n) throw ContractError("missing pseudo labels");
  std::vector<std::optional<Targets>> gold(n), src_pseudo(n), trg_pseudo(n);
  for (int b = 0; b < n; ++b) {
    if (batch.roles[b] == Role::kSourceLabeled) {
      if (!batch.gold[b]) throw ContractError("source sentence without gold labels");
      gold[b] = GoldTargets(*batch.gold[b], tagset);
      src_pseudo[b] = pseudo[b];
    } else {
      trg_pseudo[b] = pseudo[b];
    }
  }
  LossReport local;
  LossReport &r = report ? *report : local;
  const double m = TrainConfig::kSourceMix;
  Var<Real> j_src = Add(Scale(MultitaskLoss(g, pass, gold, &r.gold), m),
                        Scale(MultitaskLoss(g, pass, src_pseudo, &r.src_teach), 1.0 - m));
  Var<Real> j_trg = MultitaskLoss(g, pass, trg_pseudo, &r.trg_teach);
  r.j_src = double(j_src.scalar());
  r.j_trg = double(j_trg.scalar());
  return {j_src, j_trg};
}

template <typename Real>
Var<Real> EntityMseLoss(Graph<Real> &g, const EncodedBatch<Real> &encoded,
                        const std::vector<std::vector<EntitySpan>> &spans, int num_classes) {
  if (spans.size() != encoded.segments.size())
    throw ContractError("one span list per sentence required");
  std::vector<std::vector<int>> starts(num_classes), ends(num_classes);
  for (std::size_t b = 0; b < spans.size(); ++b) {
    const Segment &seg = encoded.segments[b];
    for (const auto &sp : spans[b]) {
      if (sp.cls < 0 || sp.cls >= num_classes || sp.start < 0 || sp.end >= seg.length ||
          sp.start > sp.end)
        throw ContractError("entity span outside its sentence");
      starts[sp.cls].push_back(seg.begin + sp.start);
      ends[sp.cls].push_back(seg.begin + sp.end);
    }
  }
  const int two_d = 2 * encoded.hidden.value().cols();
  Var<Real> total;
  for (int c = 0; c < num_classes; ++c) {
    const int m = static_cast<int>(starts[c].size());
    if (m < 2) continue;
    Var<Real> r = ConcatCols(GatherRows(encoded.hidden, starts[c]), GatherRows(encoded.hidden, ends[c]));
    Var<Real> term = Scale(PairwiseSqDiffSum(r), 1.0 / (double(num_classes) * m * two_d));
    total = total.valid() ? Add(total, term) : term;
  }
  return total.valid() ? total : Zero(g);
}

double EntityMseValue(const std::vector<EntityRepresentation> &reps, int num_classes) {
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<const EntityRepresentation *> rc;
    for (const auto &r : reps)
      if (r.cls == c) rc.push_back(&r);
    if (rc.size() < 2) continue;
    double pairs = 0.0;
    for (std::size_t a = 0; a < rc.size(); ++a) {
      for (std::size_t b = 0; b < rc.size(); ++b) {
        if (a == b) continue;
        const auto &x = rc[a]->vector, &y = rc[b]->vector;
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += (double(x[j]) - y[j]) * (double(x[j]) - y[j]);
        pairs += s / static_cast<double>(x.size());
      }
    }
    total += pairs / static_cast<double>(rc.size());
  }
  return total / num_classes;
}

namespace {

template <typename Real>
BasicTensor<Real> StackRows(const std::vector<PredictionTriple> &preds,
                            const Tensor PredictionTriple::*field, int total) {
  const int k = (preds.front().*field).cols();
  BasicTensor<Real> out({total, k});
  std::size_t pos = 0;
  for (const auto &p : preds)
    for (float v : (p.*field).values()) out[pos++] = static_cast<Real>(v);
  if (pos != out.size()) throw ContractError("teacher predictions do not match the batch");
  return out;
}

}  // namespace

template <typename Real>
Var<Real> SelfKlLoss(Graph<Real> &g, const ForwardPass<Real> &student,
                     const std::vector<PredictionTriple> &teacher,
                     const std::vector<bool> &include, HeadLosses *out) {
  const auto &segs = student.encoded.segments;
  if (teacher.size() != segs.size() || include.size() != segs.size())
    throw ContractError("one teacher prediction per sentence required");
  const int total = student.sla_logits.value().rows();
  int tokens = 0;
  const auto w = RowWeights(segs, include, total, &tokens);
  if (tokens == 0) {
    if (out) *out = HeadLosses{};
    return Zero(g);
  }
  Var<Real> ks = SoftmaxKl(student.sla_logits, StackRows<Real>(teacher, &PredictionTriple::sla, total), w);
  Var<Real> kb = SoftmaxKl(student.start_logits, StackRows<Real>(teacher, &PredictionTriple::start, total), w);
  Var<Real> ke = SoftmaxKl(student.end_logits, StackRows<Real>(teacher, &PredictionTriple::end, total), w);
  if (out) *out = {double(ks.scalar()), double(kb.scalar()), double(ke.scalar())};
  return Add(Add(ks, kb), ke);
}

template <typename Real>
Var<Real> Stage2Loss(Graph<Real> &g, ModelParams<Real> &student, ModelParams<Real> &teacher,
                     const Batch &batch, double alpha, Variant variant,
                     const ForwardOptions &options, LossReport *report,
                     const std::vector<std::vector<EntitySpan>> *pinned_spans) {
  if (variant == Variant::kMlt) throw ConfigError("variant mlt has no Stage-2 objective");
  LossReport r;
  r.variant = variant;
  r.alpha = alpha;
  r.source_sentences = batch.num_role(Role::kSourceLabeled);
  r.target_sentences = batch.num_role(Role::kTargetUnlabeled);
  for (int b = 0; b < batch.size(); ++b)
    (batch.roles[b] == Role::kSourceLabeled ? r.source_tokens : r.target_tokens) += batch.lengths[b];

  const auto teacher_preds = TeacherPredictions(teacher, batch);
  const ForwardPass<Real> pass = Forward(g, student, batch, options);

  Var<Real> j_src, j_trg;
  if (variant == Variant::kSelfKl) {
    std::vector<std::optional<Targets>> gold(batch.size());
    std::vector<bool> is_src(batch.size()), is_trg(batch.size());
    for (int b = 0; b < batch.size(); ++b) {
      is_src[b] = batch.roles[b] == Role::kSourceLabeled;
      is_trg[b] = !is_src[b];
      if (is_src[b]) {
        if (!batch.gold[b]) throw ContractError("source sentence without gold labels");
        gold[b] = GoldTargets(*batch.gold[b], student.tagset);
      }
    }
    const double m = TrainConfig::kSourceMix;
    j_src = Add(Scale(MultitaskLoss(g, pass, gold, &r.gold), m),
                Scale(SelfKlLoss(g, pass, teacher_preds, is_src, &r.src_teach), 1.0 - m));
    j_trg = SelfKlLoss(g, pass, teacher_preds, is_trg, &r.trg_teach);
    r.j_src = double(j_src.scalar());
    r.j_trg = double(j_trg.scalar());
  } else {
    std::vector<Targets> pseudo;
    for (const auto &p : teacher_preds) pseudo.push_back(PseudoTargets(p));
    std::tie(j_src, j_trg) = DualTeachingLoss(g, pass, batch, student.tagset, pseudo, &r);
  }

  Var<Real> total = j_src;
  if (variant != Variant::kNoTrg) {
    total = Add(total, j_trg);
  } else {
    r.j_trg = 0.0;
    r.trg_teach = HeadLosses{};
  }
  if (variant != Variant::kNoMse) {
    std::vector<std::vector<EntitySpan>> own;
    if (!pinned_spans) own = PredictedSpans(Predictions(pass));
    const auto &spans = pinned_spans ? *pinned_spans : own;
    for (const auto &s : spans) r.entities += static_cast<int>(s.size());
    Var<Real> mse = EntityMseLoss(g, pass.encoded, spans, student.tagset.num_classes());
    r.j_mse = double(mse.scalar());
    if (alpha != 0.0) total = Add(total, Scale(mse, alpha));
  }
  r.j_total = double(total.scalar());
  if (report) *report = r;
  return total;
}

#define DUALNER_INSTANTIATE(Real)                                                              \
  template Var<Real> MultitaskLoss(Graph<Real> &, const ForwardPass<Real> &,                   \
                                   const std::vector<std::optional<Targets>> &, HeadLosses *); \
  template Var<Real> Stage1Loss(Graph<Real> &, ModelParams<Real> &, const Batch &,             \
                                const ForwardOptions &, LossReport *);                         \
  template std::vector<PredictionTriple> TeacherPredictions(ModelParams<Real> &, const Batch &); \
  template std::vector<Targets> MakePseudoLabels(ModelParams<Real> &, const Batch &);          \
  template std::pair<Var<Real>, Var<Real>> DualTeachingLoss(                                   \
      Graph<Real> &, const ForwardPass<Real> &, const Batch &, const TagSet &,                 \
      const std::vector<Targets> &, LossReport *);                                             \
  template Var<Real> EntityMseLoss(Graph<Real> &, const EncodedBatch<Real> &,                  \
                                   const std::vector<std::vector<EntitySpan>> &, int);         \
  template Var<Real> SelfKlLoss(Graph<Real> &, const ForwardPass<Real> &,                      \
                                const std::vector<PredictionTriple> &, const std::vector<bool> &, \
                                HeadLosses *);                                                 \
  template Var<Real> Stage2Loss(Graph<Real> &, ModelParams<Real> &, ModelParams<Real> &,       \
                                const Batch &, double, Variant, const ForwardOptions &,        \
                                LossReport *, const std::vector<std::vector<EntitySpan>> *);

DUALNER_INSTANTIATE(float)
DUALNER_INSTANTIATE(double)
#undef DUALNER_INSTANTIATE

}  // namespace dualner
