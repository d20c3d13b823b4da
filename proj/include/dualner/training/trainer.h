// dualner/training/trainer.h

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

#ifndef DUALNER_TRAINING_TRAINER_H_
#define DUALNER_TRAINING_TRAINER_H_

#include <cstdint>
#include <ostream>
#include <vector>

#include "dualner/data/corpus.h"
#include "dualner/model/model.h"
#include "dualner/training/config.h"
#include "dualner/training/losses.h"

namespace dualner {

/// Adam with bias correction.
class Adam {
 public:
  Adam(const std::vector<Parameter<float> *> &params, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void Step(const std::vector<Parameter<float> *> &params, double lr);
  int steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Linear warmup to `config.lr` over `config.warmup` steps, then constant.
/// `step` counts from 1.
double LearningRate(const TrainConfig &config, int step);

struct EvalRecord {
  int step = 0;
  double dev_f1 = 0.0;
  bool promoted = false;  // Stage 2: teacher replaced; Stage 1: new best
  std::uint64_t teacher_digest = 0;  // Stage 2: teacher after this evaluation
};

struct TrainResult {
  ModelParams<float> model;  // Stage 1: best checkpoint; Stage 2: final teacher
  double best_dev_f1 = 0.0;
  int steps = 0;
  std::vector<EvalRecord> evals;
  std::vector<LossReport> losses;  // one per step
  std::uint64_t initial_teacher_digest = 0;  // Stage 2, after vocabulary extension
};

/// Line-oriented key=value records on `log` (may be null).
///   step ... / eval ... / promote ...
/// Throws DivergenceError when a loss turns non-finite.
TrainResult TrainStage1(const TrainConfig &config, const Corpus &source_train,
                        const std::vector<Corpus> &dev, const Vocabulary &vocab,
                        const TagSet &tagset, std::ostream *log = nullptr);

/// Student starts as a copy of `teacher`; the teacher is replaced by the
/// student whenever pooled dev F1 improves on the best so far (initially
/// the teacher's own). Variant mlt returns `teacher` untouched. With
/// source_fraction < 1 the unselected source sentences join the unlabeled
/// pool.
TrainResult TrainStage2(const TrainConfig &config, const ModelParams<float> &teacher,
                        const Corpus &source_train, const std::vector<Corpus> &target_train,
                        const std::vector<Corpus> &dev, std::ostream *log = nullptr);

}  // namespace dualner

#endif  // DUALNER_TRAINING_TRAINER_H_
