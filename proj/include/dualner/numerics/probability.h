// dualner/numerics/probability.h

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

#ifndef DUALNER_NUMERICS_PROBABILITY_H_
#define DUALNER_NUMERICS_PROBABILITY_H_

#include <span>
#include <vector>

#include "dualner/numerics/tensor.h"

namespace dualner {

/// Categorical distribution; entries in [0,1] summing to 1 within 1e-6.
class Distribution {
 public:
  Distribution() = default;
  /// Throws DomainError if `probs` is empty, has entries outside [0,1] or
  /// does not sum to one.
  explicit Distribution(std::vector<float> probs);

  std::size_t size() const { return probs_.size(); }
  float operator[](std::size_t i) const { return probs_[i]; }
  std::span<const float> values() const { return probs_; }

  /// Index of the largest entry; ties go to the lowest index.
  int Argmax() const;

  bool operator==(const Distribution &) const = default;

  /// One-hot distribution over `n` classes.
  static Distribution OneHot(int n, int index);

 private:
  std::vector<float> probs_;
};

/// Max-subtracted softmax. Throws DomainError on empty input.
Distribution Softmax(std::span<const float> logits);

/// -log(max(dist[target], 1e-12)).
double CrossEntropy(const Distribution &dist, int target);

/// sum_i p_i log(p_i / q_i) with q clamped at 1e-12; terms with p_i = 0
/// contribute 0.
double KlDivergence(const Distribution &p, const Distribution &q);

/// Lowest-index argmax over a raw span.
int ArgmaxIndex(std::span<const float> values);

/// Splits a [rows, k] probability matrix into per-row distributions.
std::vector<Distribution> RowDistributions(const Tensor &probs);

}  // namespace dualner

#endif  // DUALNER_NUMERICS_PROBABILITY_H_
