// training/trainer.cc

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

#include "dualner/training/trainer.h"

#include <cmath>

#include "dualner/data/batching.h"
#include "dualner/eval/evaluation.h"
#include "dualner/model/checkpoint.h"
#include "dualner/util/error.h"
#include "dualner/util/key_value.h"

namespace dualner {

Adam::Adam(const std::vector<Parameter<float> *> &params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto *p : params) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::Step(const std::vector<Parameter<float> *> &params, double lr) {
  if (params.size() != m_.size()) throw ContractError("parameter list changed under Adam");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_), c2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto &value = params[i]->value.storage();
    const auto &grad = params[i]->grad.values();
    auto &m = m_[i];
    auto &v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      value[j] -= static_cast<float>(lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_));
    }
  }
}

double LearningRate(const TrainConfig &config, int step) {
  if (config.warmup == 0 || step >= config.warmup) return config.lr;
  return config.lr * static_cast<double>(step) / config.warmup;
}

namespace {

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void LogStep(std::ostream *log, int stage, int epoch, int step, double lr, const LossReport &r) {
  if (!log) return;
  *log << "step stage=" << stage << " epoch=" << epoch << " step=" << step
       << " lr=" << FormatDouble(lr) << " j_total=" << FormatDouble(r.j_total)
       << " j_sla=" << FormatDouble(r.gold.sla) << " j_start=" << FormatDouble(r.gold.start)
       << " j_end=" << FormatDouble(r.gold.end);
  if (!r.stage1) {
    *log << " j_src=" << FormatDouble(r.j_src) << " j_trg=" << FormatDouble(r.j_trg)
         << " j_mse=" << FormatDouble(r.j_mse) << " entities=" << r.entities;
  }
  *log << " src=" << r.source_sentences << " trg=" << r.target_sentences << "\n";
}

void CheckFinite(const LossReport &r, int stage, int step) {
  if (!std::isfinite(r.j_total))
    throw DivergenceError("non-finite loss at stage " + std::to_string(stage) + " step " +
                          std::to_string(step) + " (j_sla=" + FormatDouble(r.gold.sla) +
                          " j_mse=" + FormatDouble(r.j_mse) + ")");
}

int StepsPerEpoch(const std::vector<const Corpus *> &src, const std::vector<const Corpus *> &trg,
                  const TrainConfig &config, MixingPolicy policy, const Vocabulary &vocab) {
  return static_cast<int>(
      MakeBatches(src, trg, config.batch_size, policy, config.seed, 0, vocab, config.max_len).size());
}

}  // namespace

TrainResult TrainStage1(const TrainConfig &config, const Corpus &source_train,
                        const std::vector<Corpus> &dev, const Vocabulary &vocab,
                        const TagSet &tagset, std::ostream *log) {
  config.Validate();
  if (!source_train.fully_labeled()) throw ContractError("Stage 1 needs a labeled source corpus");
  const SourceSplit split = SelectSourceFraction(source_train, config.source_fraction, config.seed);
  const std::vector<const Corpus *> src{&split.labeled};

  ModelParams<float> params = InitModel<float>(config.Encoder(vocab.size()), tagset, vocab, config.seed);
  auto all = params.All();
  Adam adam(all);
  TrainResult result;
  result.best_dev_f1 = -1.0;
  const int per_epoch = StepsPerEpoch(src, {}, config, MixingPolicy::kSourceOnly, vocab);
  const int total_steps = per_epoch * config.epochs;
  int step = 0;
  auto evaluate = [&]() {
    const double f1 = EvaluatePooled(params, dev, config.eval_batch).f1();
    EvalRecord rec{step, f1, f1 > result.best_dev_f1};
    if (rec.promoted) {
      result.best_dev_f1 = f1;
      result.model = params;
    }
    result.evals.push_back(rec);
    if (log)
      *log << "eval stage=1 step=" << step << " dev_f1=" << FormatDouble(f1)
           << " best=" << FormatDouble(result.best_dev_f1) << (rec.promoted ? " new_best=1" : "")
           << "\n";
  };
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = MakeBatches(src, {}, config.batch_size, MixingPolicy::kSourceOnly,
                                     config.seed, epoch, vocab, config.max_len);
    for (const Batch &batch : batches) {
      ++step;
      const double lr = LearningRate(config, step);
      Graph<float> g;
      LossReport r;
      Var<float> loss = Stage1Loss(g, params, batch,
                                   ForwardOptions{true, Mix(config.seed ^ Mix(1000003ULL * step + 1))}, &r);
      CheckFinite(r, 1, step);
      g.Backward(loss);
      adam.Step(all, lr);
      params.ZeroGrad();
      LogStep(log, 1, epoch, step, lr, r);
      result.losses.push_back(r);
      if (step % config.eval_interval == 0 || step == total_steps) evaluate();
    }
  }
  if (result.evals.empty()) evaluate();
  result.steps = step;
  return result;
}

TrainResult TrainStage2(const TrainConfig &config, const ModelParams<float> &teacher_init,
                        const Corpus &source_train, const std::vector<Corpus> &target_train,
                        const std::vector<Corpus> &dev, std::ostream *log) {
  config.Validate();
  TrainResult result;
  ModelParams<float> teacher = teacher_init;
  if (config.variant == Variant::kMlt) {
    result.model = std::move(teacher);
    result.best_dev_f1 = EvaluatePooled(result.model, dev, config.eval_batch).f1();
    return result;
  }
  if (!source_train.fully_labeled()) throw ContractError("Stage 2 needs a labeled source corpus");
  const SourceSplit split = SelectSourceFraction(source_train, config.source_fraction, config.seed);
  std::vector<const Corpus *> src{&split.labeled}, trg;
  if (config.variant != Variant::kNoTrg) {
    for (const Corpus &c : target_train) trg.push_back(&c);
    if (!split.unlabeled_rest.empty()) trg.push_back(&split.unlabeled_rest);
  }
  std::vector<const Corpus *> vocab_from = src;
  vocab_from.insert(vocab_from.end(), trg.begin(), trg.end());
  ExtendVocabulary(teacher, vocab_from);
  const Vocabulary &vocab = teacher.vocab;

  ModelParams<float> student = teacher;
  result.initial_teacher_digest = ParamsDigest(teacher);
  auto all = student.All();
  Adam adam(all);
  result.best_dev_f1 = EvaluatePooled(teacher, dev, config.eval_batch).f1();
  if (log) *log << "eval stage=2 step=0 dev_f1=" << FormatDouble(result.best_dev_f1) << " teacher=1\n";
  const int per_epoch = StepsPerEpoch(src, trg, config, MixingPolicy::kHalfSource, vocab);
  const int total_steps = per_epoch * config.epochs;
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = MakeBatches(src, trg, config.batch_size, MixingPolicy::kHalfSource,
                                     config.seed, epoch, vocab, config.max_len);
    for (const Batch &batch : batches) {
      ++step;
      const double lr = LearningRate(config, step);
      Graph<float> g;
      LossReport r;
      Var<float> loss = Stage2Loss(g, student, teacher, batch, config.alpha, config.variant,
                                   ForwardOptions{true, Mix(config.seed ^ Mix(2000003ULL * step + 2))}, &r);
      CheckFinite(r, 2, step);
      g.Backward(loss);
      adam.Step(all, lr);
      student.ZeroGrad();
      LogStep(log, 2, epoch, step, lr, r);
      result.losses.push_back(r);
      if (step % config.eval_interval == 0 || step == total_steps) {
        const double f1 = EvaluatePooled(student, dev, config.eval_batch).f1();
        EvalRecord rec{step, f1, f1 > result.best_dev_f1};
        if (rec.promoted) {
          teacher = student;
          result.best_dev_f1 = f1;
        }
        rec.teacher_digest = ParamsDigest(teacher);
        result.evals.push_back(rec);
        if (log) {
          *log << "eval stage=2 step=" << step << " dev_f1=" << FormatDouble(f1)
               << " best=" << FormatDouble(result.best_dev_f1) << "\n";
          if (rec.promoted) *log << "promote step=" << step << " dev_f1=" << FormatDouble(f1) << "\n";
        }
      }
    }
  }
  result.steps = step;
  result.model = std::move(teacher);
  result.model.ZeroGrad();
  return result;
}

}  // namespace dualner
