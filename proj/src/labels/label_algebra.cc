// labels/label_algebra.cc

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

#include "dualner/labels/label_algebra.h"

#include <algorithm>
#include <set>

#include "dualner/util/error.h"

namespace dualner {

TagSet::TagSet(std::vector<std::string> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw ConfigError("tag set needs at least one entity class");
  std::set<std::string> seen;
  for (const auto &c : classes_) {
    if (c.empty()) throw ConfigError("empty entity class name");
    if (c == "O") throw ConfigError("entity class may not be named O");
    if (c.find_first_of(" \t\n") != std::string::npos)
      throw ConfigError("entity class name contains whitespace: " + c);
    if (!seen.insert(c).second) throw ConfigError("duplicate entity class: " + c);
  }
}

TagSet TagSet::Default() { return TagSet({"LOC", "PER", "ORG"}); }

std::string TagSet::SequenceLabelName(int label) const {
  if (label == kOutside) return "O";
  if (label < 0 || label >= num_sequence_labels())
    throw DomainError("sequence label index out of range");
  return (IsBegin(label) ? "B-" : "I-") + classes_[LabelClass(label)];
}

std::string TagSet::SpanLabelName(int label) const {
  if (label == kOutside) return "O";
  if (label < 0 || label >= num_span_labels()) throw DomainError("span label index out of range");
  return classes_[label - 1];
}

std::optional<int> TagSet::ClassIndex(std::string_view name) const {
  for (int c = 0; c < num_classes(); ++c)
    if (classes_[c] == name) return c;
  return std::nullopt;
}

std::optional<int> TagSet::ParseSequenceLabel(std::string_view text) const {
  if (text == "O") return kOutside;
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  auto cls = ClassIndex(text.substr(2));
  if (!cls) return std::nullopt;
  if (text[0] == 'B') return BeginLabel(*cls);
  if (text[0] == 'I') return InsideLabel(*cls);
  return std::nullopt;
}

std::optional<int> TagSet::ParseSpanLabel(std::string_view text) const {
  if (text == "O") return kOutside;
  auto cls = ClassIndex(text);
  if (!cls) return std::nullopt;
  return SpanLabel(*cls);
}

namespace {

bool ContinuesFrom(int prev, int label) {
  return prev != kOutside && LabelClass(prev) == LabelClass(label);
}

// Spans of a sequence already known to be valid BIO2.
std::vector<EntitySpan> RunsOf(const LabelSequence &labels) {
  std::vector<EntitySpan> spans;
  const int n = static_cast<int>(labels.size());
  for (int i = 0; i < n; ++i) {
    if (!IsBegin(labels[i])) continue;
    const int cls = LabelClass(labels[i]);
    int j = i;
    while (j + 1 < n && labels[j + 1] == InsideLabel(cls)) ++j;
    spans.push_back({i, j, cls});
    i = j;
  }
  return spans;
}

SpanLabelPair SpanLabelsOf(const std::vector<EntitySpan> &spans, std::size_t n) {
  SpanLabelPair out{std::vector<int>(n, kOutside), std::vector<int>(n, kOutside)};
  for (const auto &s : spans) {
    out.start[s.start] = SpanLabel(s.cls);
    out.end[s.end] = SpanLabel(s.cls);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> ValidateBio2(const LabelSequence &labels, const TagSet &tagset) {
  std::vector<std::size_t> bad;
  int prev = kOutside;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= tagset.num_sequence_labels())
      throw DomainError("label index " + std::to_string(l) + " outside the tag alphabet");
    if (IsInside(l) && !ContinuesFrom(prev, l)) bad.push_back(i);
    prev = l;
  }
  return bad;
}

LabelSequence RepairBio2(const LabelSequence &labels) {
  LabelSequence out = labels;
  int prev = kOutside;
  for (auto &l : out) {
    if (IsInside(l) && !ContinuesFrom(prev, l)) l = BeginLabel(LabelClass(l));
    prev = l;
  }
  return out;
}

std::vector<EntitySpan> SpansFromBio2(const LabelSequence &labels, const TagSet &tagset,
                                      bool repair) {
  auto bad = ValidateBio2(labels, tagset);
  if (!bad.empty()) {
    if (!repair) throw ValidationError("invalid BIO2 sequence", std::move(bad));
    return RunsOf(RepairBio2(labels));
  }
  return RunsOf(labels);
}

LabelSequence Bio2FromSpans(const std::vector<EntitySpan> &spans, int n) {
  if (n < 0) throw DomainError("negative sequence length");
  LabelSequence out(n, kOutside);
  std::vector<bool> used(n, false);
  for (const auto &s : spans) {
    if (s.start < 0 || s.end < s.start || s.end >= n || s.cls < 0)
      throw DomainError("span outside the sequence");
    for (int i = s.start; i <= s.end; ++i) {
      if (used[i]) throw DomainError("overlapping spans");
      used[i] = true;
      out[i] = (i == s.start) ? BeginLabel(s.cls) : InsideLabel(s.cls);
    }
  }
  return out;
}

SpanLabelPair ExtractSpanLabels(const LabelSequence &labels, const TagSet &tagset) {
  return SpanLabelsOf(SpansFromBio2(labels, tagset, false), labels.size());
}

std::vector<EntitySpan> PairSpans(std::span<const int> start, std::span<const int> end) {
  if (start.size() != end.size()) throw DomainError("start/end sequences differ in length");
  const int n = static_cast<int>(start.size());
  std::vector<EntitySpan> spans;
  int covered_until = -1;  // last token index of the most recent emitted span
  for (int i = 0; i < n; ++i) {
    const int label = start[i];
    if (label == kOutside) continue;
    int next_start = n;
    for (int k = i + 1; k < n; ++k) {
      if (start[k] == label) {
        next_start = k;
        break;
      }
    }
    int match = -1;
    for (int j = i; j < next_start; ++j) {
      if (end[j] == label) {
        match = j;
        break;
      }
    }
    if (match < 0 || i <= covered_until) continue;
    spans.push_back({i, match, label - 1});
    covered_until = match;
  }
  return spans;
}

std::vector<int> ArgmaxRows(const Tensor &probs) {
  std::vector<int> out(probs.rows());
  for (int r = 0; r < probs.rows(); ++r) out[r] = ArgmaxIndex(probs.row(r));
  return out;
}

LabelSequence Sequential(const Tensor &p_start, const Tensor &p_end) {
  if (p_start.rows() != p_end.rows()) throw DomainError("start/end predictions differ in length");
  auto s = ArgmaxRows(p_start);
  auto e = ArgmaxRows(p_end);
  return Bio2FromSpans(PairSpans(s, e), static_cast<int>(s.size()));
}

LabelSequence Sequential(std::span<const Distribution> p_start,
                         std::span<const Distribution> p_end) {
  if (p_start.size() != p_end.size()) throw DomainError("start/end predictions differ in length");
  std::vector<int> s, e;
  for (const auto &d : p_start) s.push_back(d.Argmax());
  for (const auto &d : p_end) e.push_back(d.Argmax());
  return Bio2FromSpans(PairSpans(s, e), static_cast<int>(s.size()));
}

SpanLabelPair ExtractSpan(const Tensor &p_sla) {
  LabelSequence hard = RepairBio2(ArgmaxRows(p_sla));
  return SpanLabelsOf(RunsOf(hard), hard.size());
}

SpanLabelPair ExtractSpan(std::span<const Distribution> p_sla) {
  LabelSequence hard;
  for (const auto &d : p_sla) hard.push_back(d.Argmax());
  hard = RepairBio2(hard);
  return SpanLabelsOf(RunsOf(hard), hard.size());
}

}  // namespace dualner
