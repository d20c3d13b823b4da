// dualner/numerics/autodiff.h

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

#ifndef DUALNER_NUMERICS_AUTODIFF_H_
#define DUALNER_NUMERICS_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dualner/numerics/tensor.h"

namespace dualner {

/// Trainable tensor with a persistent gradient accumulator. Backward passes
/// add into `grad`; the training loop zeroes it between steps.
template <typename Real>
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, BasicTensor<Real> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void ZeroGrad() { grad.SetZero(); }

  template <typename Other>
  Parameter<Other> Cast() const {
    Parameter<Other> p(name, value.template Cast<Other>());
    p.grad = grad.template Cast<Other>();
    return p;
  }

  std::string name;
  BasicTensor<Real> value;
  BasicTensor<Real> grad;
};

enum class OpKind {
  kParameter,
  kConstant,
  kMatMul,
  kAdd,
  kAddBias,
  kSub,
  kMul,
  kScale,
  kSum,
  kConcatCols,
  kSliceRows,
  kGatherRows,
  kLayerNorm,
  kGelu,
  kSoftmaxRows,
  kDropout,
  kSegmentAttention,
  kSoftmaxCrossEntropy,
  kSoftmaxKl,
  kPairwiseSqDiffSum,
};

template <typename Real>
class Graph;

template <typename Real>
struct Node {
  using BackwardFn = std::function<void(Graph<Real> &, int)>;

  const BasicTensor<Real> &Value() const {
    return external != nullptr ? *external : value;
  }

  OpKind op = OpKind::kConstant;
  std::vector<int> inputs;
  BasicTensor<Real> value;
  const BasicTensor<Real> *external = nullptr;  // parameter leaves
  Parameter<Real> *param = nullptr;
  BasicTensor<Real> grad;
  bool needs_grad = false;
  BackwardFn backward;
};

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <typename Real>
class Var {
 public:
  Var() = default;
  Var(Graph<Real> *g, int id) : graph_(g), id_(id) {}

  const BasicTensor<Real> &value() const;
  const BasicTensor<Real> &grad() const;
  Graph<Real> *graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  /// Convenience for scalar nodes.
  Real scalar() const { return value()[0]; }

 private:
  Graph<Real> *graph_ = nullptr;
  int id_ = -1;
};

/// Append-only tape. Nodes are created in topological order, so the graph is
/// acyclic by construction and Backward is a single reverse sweep.
template <typename Real>
class Graph {
 public:
  /// With record_grad == false, parameters enter as constants and no
  /// gradient bookkeeping is done (teacher inference, evaluation).
  explicit Graph(bool record_grad = true) : record_grad_(record_grad) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Var<Real> Param(Parameter<Real> &p);
  Var<Real> Constant(BasicTensor<Real> value);

  /// Fills d(loss)/d(node) for every node; adds into parameter accumulators.
  /// Throws ContractError when `loss` is not a single-element tensor.
  void Backward(const Var<Real> &loss);

  bool record_grad() const { return record_grad_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  Node<Real> &node(int id) { return *nodes_[id]; }
  const Node<Real> &node(int id) const { return *nodes_[id]; }

  /// Accumulator for node `id`, or nullptr when it does not need a gradient.
  BasicTensor<Real> *GradOf(int id);

  Var<Real> Push(OpKind op, std::vector<int> inputs, BasicTensor<Real> value,
                 typename Node<Real>::BackwardFn backward);

 private:
  bool record_grad_;
  std::vector<std::unique_ptr<Node<Real>>> nodes_;
};

template <typename Real>
const BasicTensor<Real> &Var<Real>::value() const {
  return graph_->node(id_).Value();
}
template <typename Real>
const BasicTensor<Real> &Var<Real>::grad() const {
  return graph_->node(id_).grad;
}

/// Packed-sequence segment: rows [begin, begin + length) of a [T, d] matrix.
struct Segment {
  int begin = 0;
  int length = 0;
};

// All matrix ops view a tensor as rows x cols over its last dimension.

/// [m,k] x [k,n] -> [m,n].
template <typename Real>
Var<Real> MatMul(const Var<Real> &a, const Var<Real> &b);
template <typename Real>
Var<Real> Add(const Var<Real> &a, const Var<Real> &b);
/// a[m,n] + bias[n] broadcast over rows.
template <typename Real>
Var<Real> AddBias(const Var<Real> &a, const Var<Real> &bias);
template <typename Real>
Var<Real> Sub(const Var<Real> &a, const Var<Real> &b);
template <typename Real>
Var<Real> Mul(const Var<Real> &a, const Var<Real> &b);
template <typename Real>
Var<Real> Scale(const Var<Real> &a, double factor);
/// Sum of all elements, shape [1].
template <typename Real>
Var<Real> Sum(const Var<Real> &a);
template <typename Real>
Var<Real> Mean(const Var<Real> &a);
template <typename Real>
Var<Real> ConcatCols(const Var<Real> &a, const Var<Real> &b);
template <typename Real>
Var<Real> SliceRows(const Var<Real> &a, int begin, int end);
/// Row lookup; used both for embeddings and for picking entity tokens.
template <typename Real>
Var<Real> GatherRows(const Var<Real> &a, const std::vector<int> &rows);
template <typename Real>
Var<Real> LayerNorm(const Var<Real> &x, const Var<Real> &gain,
                    const Var<Real> &bias, double eps = 1e-5);
/// GELU, tanh approximation.
template <typename Real>
Var<Real> Gelu(const Var<Real> &x);
template <typename Real>
Var<Real> SoftmaxRows(const Var<Real> &x);
/// Inverted dropout. The mask is drawn from `rng`; rate 0 is the identity.
template <typename Real>
Var<Real> Dropout(const Var<Real> &x, double rate, std::mt19937_64 &rng);
/// Multi-head scaled dot-product self-attention restricted to each segment;
/// rows of different segments never attend to each other.
template <typename Real>
Var<Real> SegmentAttention(const Var<Real> &q, const Var<Real> &k,
                           const Var<Real> &v,
                           const std::vector<Segment> &segments, int heads);
/// sum_i w_i * -log(max(softmax(logits_i)[target_i], 1e-12)).
template <typename Real>
Var<Real> SoftmaxCrossEntropy(const Var<Real> &logits,
                              const std::vector<int> &targets,
                              const std::vector<double> &weights);
/// sum_i w_i * KL(p_i || softmax(logits_i)), q clamped at 1e-12.
template <typename Real>
Var<Real> SoftmaxKl(const Var<Real> &logits, const BasicTensor<Real> &target,
                    const std::vector<double> &weights);
/// sum over ordered row pairs a != b of ||x_a - x_b||^2.
template <typename Real>
Var<Real> PairwiseSqDiffSum(const Var<Real> &x);

/// Uniform double in [0, 1) from the raw generator bits; unlike
/// std::uniform_real_distribution this is identical on every platform.
inline double UniformUnit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace dualner

#endif  // DUALNER_NUMERICS_AUTODIFF_H_
