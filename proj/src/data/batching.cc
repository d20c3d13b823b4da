// data/batching.cc

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

#include "dualner/data/batching.h"

#include <algorithm>
#include <cmath>

#include "dualner/util/error.h"

namespace dualner {

int Batch::num_tokens() const {
  int n = 0;
  for (int l : lengths) n += l;
  return n;
}

int Batch::num_role(Role r) const {
  return static_cast<int>(std::count(roles.begin(), roles.end(), r));
}

Batch MakeBatch(const std::vector<const Sentence *> &sentences, const std::vector<Role> &roles,
                const Vocabulary &vocab, int max_len) {
  if (sentences.size() != roles.size()) throw ContractError("one role per sentence required");
  if (max_len < 1) throw ContractError("max_len must be positive");
  Batch b;
  for (const Sentence *s : sentences) {
    if (s->tokens.empty()) throw ContractError("empty sentence in batch");
    b.width = std::max(b.width, std::min<int>(max_len, static_cast<int>(s->tokens.size())));
  }
  const int width = b.width;
  b.token_ids.assign(sentences.size() * width, Vocabulary::kPad);
  b.mask.assign(sentences.size() * width, 0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const Sentence &s = *sentences[i];
    const int n = std::min<int>(max_len, static_cast<int>(s.tokens.size()));
    for (int t = 0; t < n; ++t) {
      b.token_ids[i * width + t] = vocab.Id(s.tokens[t]);
      b.mask[i * width + t] = 1;
    }
    b.lengths.push_back(n);
    b.languages.push_back(s.language);
    b.roles.push_back(roles[i]);
    if (roles[i] == Role::kSourceLabeled && s.labels) {
      b.gold.emplace_back(LabelSequence(s.labels->begin(), s.labels->begin() + n));
    } else {
      b.gold.emplace_back(std::nullopt);
    }
  }
  return b;
}

void DeterministicShuffle(std::vector<std::size_t> &items, std::mt19937_64 &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

namespace {

struct Pool {
  std::vector<const Sentence *> sentences;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;

  void Reshuffle(std::mt19937_64 &rng) {
    order.resize(sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    DeterministicShuffle(order, rng);
    cursor = 0;
  }
  // Next sentence, cycling with a fresh shuffle when exhausted.
  const Sentence *Next(std::mt19937_64 &rng) {
    if (cursor == order.size()) Reshuffle(rng);
    return sentences[order[cursor++]];
  }
  std::size_t remaining() const { return order.size() - cursor; }
};

Pool Collect(const std::vector<const Corpus *> &corpora) {
  Pool p;
  for (const Corpus *c : corpora)
    for (const auto &s : c->sentences) p.sentences.push_back(&s);
  return p;
}

}  // namespace

std::vector<Batch> MakeBatches(const std::vector<const Corpus *> &source,
                               const std::vector<const Corpus *> &target, int batch_size,
                               MixingPolicy policy, std::uint64_t seed, int epoch,
                               const Vocabulary &vocab, int max_len) {
  if (batch_size < 1) throw ContractError("batch size must be positive");
  Pool src = Collect(source);
  if (src.sentences.empty()) throw ContractError("empty source corpus");
  Pool trg = Collect(target);
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1)));
  src.Reshuffle(rng);

  std::vector<Batch> batches;
  if (policy == MixingPolicy::kSourceOnly || trg.sentences.empty()) {
    while (src.remaining() > 0) {
      const std::size_t take = std::min<std::size_t>(batch_size, src.remaining());
      std::vector<const Sentence *> ss;
      for (std::size_t i = 0; i < take; ++i) ss.push_back(src.Next(rng));
      batches.push_back(MakeBatch(ss, std::vector<Role>(take, Role::kSourceLabeled), vocab, max_len));
    }
    return batches;
  }

  if (batch_size < 2) throw ContractError("mixed batches need batch size >= 2");
  trg.Reshuffle(rng);
  const int src_per = (batch_size + 1) / 2;
  const int trg_per = batch_size - src_per;
  const std::size_t ns = src.sentences.size(), nt = trg.sentences.size();
  const std::size_t steps =
      std::max((ns + src_per - 1) / src_per, (nt + trg_per - 1) / trg_per);
  // The pool that defines the epoch length is consumed exactly once.
  const bool src_leads = (ns + src_per - 1) / src_per >= (nt + trg_per - 1) / trg_per;
  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t take_s = src_per, take_t = trg_per;
    if (step + 1 == steps) {
      // Final batch keeps the 50/50 proportion of what the leading pool has left.
      const std::size_t left = src_leads ? src.remaining() : trg.remaining();
      if (src_leads) {
        take_s = left;
        take_t = std::min<std::size_t>(trg_per, left * trg_per / src_per);
      } else {
        take_t = left;
        take_s = std::max<std::size_t>(1, std::min<std::size_t>(src_per, (left * src_per + trg_per - 1) / trg_per));
      }
    }
    std::vector<const Sentence *> ss;
    std::vector<Role> roles;
    for (std::size_t i = 0; i < take_s; ++i) {
      ss.push_back(src.Next(rng));
      roles.push_back(Role::kSourceLabeled);
    }
    for (std::size_t i = 0; i < take_t; ++i) {
      ss.push_back(trg.Next(rng));
      roles.push_back(Role::kTargetUnlabeled);
    }
    batches.push_back(MakeBatch(ss, roles, vocab, max_len));
  }
  return batches;
}

SourceSplit SelectSourceFraction(const Corpus &source, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("source fraction must be in (0, 1]");
  std::vector<std::size_t> order(source.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ULL);
  DeterministicShuffle(order, rng);
  std::size_t keep = static_cast<std::size_t>(std::llround(fraction * source.size()));
  keep = std::clamp<std::size_t>(keep, source.empty() ? 0 : 1, source.size());
  std::vector<bool> kept(source.size(), false);
  for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = true;
  SourceSplit out;
  out.labeled.split = out.unlabeled_rest.split = source.split;
  out.labeled.default_language = out.unlabeled_rest.default_language = source.default_language;
  out.labeled.role = Role::kSourceLabeled;
  out.unlabeled_rest.role = Role::kTargetUnlabeled;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (kept[i]) {
      out.labeled.sentences.push_back(source.sentences[i]);
    } else {
      Sentence s = source.sentences[i];
      s.labels.reset();
      out.unlabeled_rest.sentences.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace dualner
