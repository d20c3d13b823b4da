// dualner/labels/label_algebra.h

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

#ifndef DUALNER_LABELS_LABEL_ALGEBRA_H_
#define DUALNER_LABELS_LABEL_ALGEBRA_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualner/numerics/probability.h"
#include "dualner/numerics/tensor.h"

namespace dualner {

/// Ordered entity classes. Sequence-label alphabet (2C+1):
///   0 = O, 1 + 2c = B-c, 2 + 2c = I-c.
/// Span-label alphabet (C+1):
///   0 = O, 1 + c = c.
class TagSet {
 public:
  TagSet() = default;
  /// Throws ConfigError on empty, duplicated or empty-named classes.
  explicit TagSet(std::vector<std::string> classes);

  /// LOC, PER, ORG.
  static TagSet Default();

  int num_classes() const { return static_cast<int>(classes_.size()); }
  int num_sequence_labels() const { return 2 * num_classes() + 1; }
  int num_span_labels() const { return num_classes() + 1; }
  const std::vector<std::string> &classes() const { return classes_; }
  const std::string &class_name(int c) const { return classes_.at(c); }

  std::string SequenceLabelName(int label) const;
  std::string SpanLabelName(int label) const;
  std::optional<int> ParseSequenceLabel(std::string_view text) const;
  std::optional<int> ParseSpanLabel(std::string_view text) const;
  std::optional<int> ClassIndex(std::string_view name) const;

  bool operator==(const TagSet &) const = default;

 private:
  std::vector<std::string> classes_;
};

inline constexpr int kOutside = 0;
inline int BeginLabel(int cls) { return 1 + 2 * cls; }
inline int InsideLabel(int cls) { return 2 + 2 * cls; }
inline bool IsBegin(int label) { return label > 0 && label % 2 == 1; }
inline bool IsInside(int label) { return label > 0 && label % 2 == 0; }
/// Entity class of a B-/I- label.
inline int LabelClass(int label) { return (label - 1) / 2; }
inline int SpanLabel(int cls) { return cls + 1; }

/// Per-token BIO2 label indices.
using LabelSequence = std::vector<int>;

/// Start/end view: each entry is O or an entity class (span alphabet).
struct SpanLabelPair {
  std::vector<int> start;
  std::vector<int> end;
  bool operator==(const SpanLabelPair &) const = default;
};

struct EntitySpan {
  int start = 0;
  int end = 0;  // inclusive
  int cls = 0;
  auto operator<=>(const EntitySpan &) const = default;
};

/// Positions of I-c tokens not preceded by B-c or I-c of the same class.
/// Throws DomainError on indices outside the alphabet.
std::vector<std::size_t> ValidateBio2(const LabelSequence &labels, const TagSet &tagset);

/// Turns every orphan I-c into B-c.
LabelSequence RepairBio2(const LabelSequence &labels);

/// Maximal B-c (I-c)* runs. Without `repair`, invalid input raises a
/// ValidationError carrying the violation positions.
std::vector<EntitySpan> SpansFromBio2(const LabelSequence &labels, const TagSet &tagset,
                                      bool repair = false);

/// Inverse of SpansFromBio2. Throws DomainError on overlapping or
/// out-of-range spans.
LabelSequence Bio2FromSpans(const std::vector<EntitySpan> &spans, int n);

SpanLabelPair ExtractSpanLabels(const LabelSequence &labels, const TagSet &tagset);

/// Greedy left-to-right pairing of start/end labels. A class-c start at i
/// takes the nearest class-c end j >= i that comes before the next class-c
/// start; unmatched endpoints and spans overlapping an earlier emitted span
/// are dropped.
std::vector<EntitySpan> PairSpans(std::span<const int> start, std::span<const int> end);

/// Row-wise lowest-index argmax of a [n, k] probability (or logit) matrix.
std::vector<int> ArgmaxRows(const Tensor &probs);

/// Span-head predictions -> hard BIO2 pseudo labels. Always valid BIO2.
LabelSequence Sequential(const Tensor &p_start, const Tensor &p_end);
LabelSequence Sequential(std::span<const Distribution> p_start,
                         std::span<const Distribution> p_end);

/// Sequence-labeling predictions -> hard start/end pseudo labels.
SpanLabelPair ExtractSpan(const Tensor &p_sla);
SpanLabelPair ExtractSpan(std::span<const Distribution> p_sla);

}  // namespace dualner

#endif  // DUALNER_LABELS_LABEL_ALGEBRA_H_
