// tests/common/fixtures.h

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

#ifndef DUALNER_TESTS_COMMON_FIXTURES_H_
#define DUALNER_TESTS_COMMON_FIXTURES_H_

#include <random>
#include <string>
#include <vector>

#include "dualner/data/batching.h"
#include "dualner/model/model.h"
#include "dualner/numerics/grad_check.h"
#include "dualner/training/losses.h"

namespace dualner {
namespace fixtures {

// Small mixed batch: `n_src` labeled source sentences and `n_trg`
// unlabeled target sentences over a 20-word vocabulary, lengths 3..7.
struct SmallBatch {
  Corpus corpus;
  Vocabulary vocab;
  Batch batch;
};

inline LabelSequence RandomBio2(int n, int classes, std::mt19937_64 &rng) {
  LabelSequence y(n, kOutside);
  for (int i = 0; i < n; ++i) {
    const int r = static_cast<int>(rng() % 3);
    if (r == 0) {
      y[i] = BeginLabel(static_cast<int>(rng() % classes));
    } else if (r == 1 && i > 0 && y[i - 1] != kOutside) {
      y[i] = InsideLabel(LabelClass(y[i - 1]));
    }
  }
  return y;
}

inline SmallBatch MakeSmallBatch(std::uint64_t seed, int n_src = 2, int n_trg = 2) {
  std::mt19937_64 rng(seed);
  SmallBatch out;
  std::vector<std::string> words;
  for (int w = 0; w < 20; ++w) words.push_back("w" + std::to_string(w));
  out.vocab = Vocabulary::FromTokens([&] {
    std::vector<std::string> t{"<pad>", "<unk>"};
    t.insert(t.end(), words.begin(), words.end());
    return t;
  }());
  std::vector<Role> roles;
  for (int i = 0; i < n_src + n_trg; ++i) {
    Sentence s;
    const int n = 3 + static_cast<int>(rng() % 5);
    for (int t = 0; t < n; ++t) s.tokens.push_back(words[rng() % words.size()]);
    const bool src = i < n_src;
    s.language = src ? "src" : "tgt";
    if (src) s.labels = RandomBio2(n, 3, rng);
    out.corpus.sentences.push_back(s);
    roles.push_back(src ? Role::kSourceLabeled : Role::kTargetUnlabeled);
  }
  std::vector<const Sentence *> ptrs;
  for (const auto &s : out.corpus.sentences) ptrs.push_back(&s);
  out.batch = MakeBatch(ptrs, roles, out.vocab, 64);
  return out;
}

inline EncoderConfig TinyEncoder(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.d_model = 8;
  c.layers = 1;
  c.heads = 2;
  c.ffn = 16;
  c.max_len = 16;
  c.dropout = 0.1;
  c.word_dropout = 0.1;
  return c;
}

// One class-0 and one class-1 span per sentence; with two or more
// sentences both groups have at least two members.
inline std::vector<std::vector<EntitySpan>> PinnedSpans(const Batch &batch) {
  std::vector<std::vector<EntitySpan>> spans;
  for (int b = 0; b < batch.size(); ++b) {
    spans.push_back({{0, 0, 0}, {1, batch.lengths[b] - 1, 1}});
  }
  return spans;
}

struct LossGradResult {
  std::string loss;
  int batch = 0;
  GradCheckReport report;
};

// Finite-difference checks of every training loss on `batches` random
// batches, double precision, dropout on with a fixed seed.
inline std::vector<LossGradResult> RunLossGradSuite(int batches, std::uint64_t seed) {
  std::vector<LossGradResult> results;
  const TagSet tags = TagSet::Default();
  for (int k = 0; k < batches; ++k) {
    const SmallBatch sb = MakeSmallBatch(seed + 101 * k);
    const Batch &batch = sb.batch;
    const EncoderConfig cfg = TinyEncoder(sb.vocab.size());
    auto student = InitModel<double>(cfg, tags, sb.vocab, seed + 7 * k + 1);
    auto teacher = InitModel<double>(cfg, tags, sb.vocab, seed + 7 * k + 2);
    // Sharper teacher heads give non-trivial pseudo labels.
    for (auto *w : {&teacher.sla_w, &teacher.start_w, &teacher.end_w})
      for (auto &v : w->value.storage()) v *= 6.0;
    const ForwardOptions opt{true, seed + 13 * k};
    const auto pseudo = MakePseudoLabels(teacher, batch);
    const auto teacher_preds = TeacherPredictions(teacher, batch);
    const auto spans = PinnedSpans(batch);
    std::vector<std::optional<Targets>> gold(batch.size());
    for (int b = 0; b < batch.size(); ++b)
      if (batch.gold[b]) gold[b] = GoldTargets(*batch.gold[b], tags);
    const auto params = student.All();

    results.push_back({"multitask_loss", k, GradCheck<double>([&](Graph<double> &g) {
                         return MultitaskLoss(g, Forward(g, student, batch, opt), gold, nullptr);
                       }, params)});
    results.push_back({"dual_teaching_loss", k, GradCheck<double>([&](Graph<double> &g) {
                         auto pr = DualTeachingLoss(g, Forward(g, student, batch, opt), batch, tags,
                                                    pseudo, nullptr);
                         return Add(pr.first, pr.second);
                       }, params)});
    results.push_back({"entity_mse_loss", k, GradCheck<double>([&](Graph<double> &g) {
                         return EntityMseLoss(g, Encode(g, student, batch, opt), spans, 3);
                       }, params)});
    results.push_back({"self_kl_loss", k, GradCheck<double>([&](Graph<double> &g) {
                         return SelfKlLoss(g, Forward(g, student, batch, opt), teacher_preds,
                                           std::vector<bool>(batch.size(), true), nullptr);
                       }, params)});
    results.push_back({"stage2_total", k, GradCheck<double>([&](Graph<double> &g) {
                         return Stage2Loss(g, student, teacher, batch, 0.5, Variant::kDualNer, opt,
                                           nullptr, &spans);
                       }, params)});
  }
  return results;
}

}  // namespace fixtures
}  // namespace dualner

#endif  // DUALNER_TESTS_COMMON_FIXTURES_H_
