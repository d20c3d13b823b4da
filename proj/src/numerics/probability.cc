// numerics/probability.cc

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

#include "dualner/numerics/probability.h"

#include <cmath>

#include "dualner/numerics/autodiff.h"

namespace dualner {

Distribution::Distribution(std::vector<float> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("empty distribution");
  double sum = 0.0;
  for (float p : probs_) {
    if (!(p >= 0.0f && p <= 1.0f)) throw DomainError("probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw DomainError("probabilities do not sum to 1");
}

int Distribution::Argmax() const { return ArgmaxIndex(probs_); }

Distribution Distribution::OneHot(int n, int index) {
  if (n < 1 || index < 0 || index >= n) throw DomainError("one-hot index out of range");
  std::vector<float> p(n, 0.0f);
  p[index] = 1.0f;
  return Distribution(std::move(p));
}

int ArgmaxIndex(std::span<const float> values) {
  if (values.empty()) throw DomainError("argmax of empty vector");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

Distribution Softmax(std::span<const float> logits) {
  if (logits.empty()) throw DomainError("softmax of empty vector");
  double mx = logits[0];
  for (float v : logits) {
    if (!std::isfinite(v)) throw DomainError("softmax of non-finite logit");
    mx = std::max<double>(mx, v);
  }
  std::vector<double> e(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(double(logits[i]) - mx);
    sum += e[i];
  }
  std::vector<float> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<float>(e[i] / sum);
  return Distribution(std::move(p));
}

double CrossEntropy(const Distribution &dist, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= dist.size())
    throw DomainError("cross-entropy target out of range");
  return -std::log(std::max<double>(dist[target], kProbabilityFloor));
}

double KlDivergence(const Distribution &p, const Distribution &q) {
  if (p.size() != q.size()) throw DomainError("KL divergence of different lengths");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;
    kl += pi * (std::log(pi) - std::log(std::max<double>(q[i], kProbabilityFloor)));
  }
  return std::max(kl, 0.0);
}

std::vector<Distribution> RowDistributions(const Tensor &probs) {
  std::vector<Distribution> out;
  out.reserve(probs.rows());
  for (int r = 0; r < probs.rows(); ++r) {
    auto row = probs.row(r);
    out.emplace_back(std::vector<float>(row.begin(), row.end()));
  }
  return out;
}

}  // namespace dualner
