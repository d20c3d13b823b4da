// tests/unit/data_test.cc

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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "dualner/data/batching.h"
#include "dualner/data/corpus.h"
#include "dualner/data/synthetic.h"
#include "dualner/util/error.h"

using namespace dualner;

namespace {

const TagSet kTags = TagSet::Default();

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("dualner_data_" + name)).string();
}

Corpus Numbered(int n, const std::string &lang, bool labeled) {
  Corpus c;
  for (int i = 0; i < n; ++i) {
    Sentence s;
    s.tokens = {lang + std::to_string(i), "x"};
    s.language = lang;
    if (labeled) s.labels = LabelSequence{BeginLabel(0), kOutside};
    c.sentences.push_back(s);
  }
  if (!labeled) c.role = Role::kTargetUnlabeled;
  return c;
}

SynthConfig SmallSynth() {
  SynthConfig c;
  c.source_train = 200;
  c.target_train = 150;
  c.dev = 40;
  c.test = 40;
  return c;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("parse examples") {
  Corpus one = ParseColumnText("John\tB-PER\n\n", kTags);
  REQUIRE(one.size() == 1);
  CHECK(one.sentences[0].tokens == std::vector<std::string>{"John"});
  CHECK(*one.sentences[0].labels == LabelSequence{BeginLabel(1)});

  CHECK(ParseColumnText("", kTags).empty());

  Corpus de = ParseColumnText("# lang=de\nBerlin\tB-LOC\n\n", kTags);
  REQUIRE(de.size() == 1);
  CHECK(de.sentences[0].language == "de");
}

TEST_CASE("parse errors carry line numbers") {
  try {
    ParseColumnText("a\tO\nb\tB-MISC\n", kTags);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
  try {
    ParseColumnText("a\tO\n\nb\tO\textra\n", kTags);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(ParseColumnText("a\tO\nb\n", kTags), ParseError);
  CHECK_THROWS_AS(ParseColumnFile(TempPath("does_not_exist"), kTags), IoError);
}

TEST_CASE("unlabeled corpora use one column") {
  Corpus c = ParseColumnText("a\nb\n\nc\n", kTags, "xx");
  REQUIRE(c.size() == 2);
  CHECK_FALSE(c.sentences[0].labels);
  CHECK(c.sentences[1].language == "xx");
  CHECK(FormatColumnText(c, kTags).find('\t') == std::string::npos);
}

TEST_CASE("write then parse round trip") {
  const std::string text =
      "# lang=en\nJohn\tB-PER\nlives\tO\nin\tO\nNew\tB-LOC\nYork\tI-LOC\n\n"
      "# lang=de\nACME\tB-ORG\n\n";
  Corpus c = ParseColumnText(text, kTags);
  CHECK(FormatColumnText(c, kTags) == text);
  const std::string path = TempPath("roundtrip.txt");
  WriteColumnFile(c, kTags, path);
  CHECK(ParseColumnFile(path, kTags) == c);
  WriteColumnFile(c, kTags, path);
  CHECK(FormatColumnText(ParseColumnFile(path, kTags), kTags) == text);
  std::remove(path.c_str());
}

TEST_CASE("span column round trip") {
  Corpus c = ParseColumnText("a\tB-PER\nb\tI-PER\nc\tB-LOC\n\n", kTags, "en");
  const std::string path = TempPath("spans.txt");
  WriteSpanColumnFile(c, kTags, path);
  CHECK(ParseSpanColumnFile(path, kTags, "en") == c);
  std::remove(path.c_str());
}

TEST_CASE("vocabulary") {
  Corpus c = ParseColumnText("b\nA\nb\n", kTags);
  Vocabulary v = Vocabulary::Build({&c});
  CHECK(v.size() == 4);
  CHECK(v.Id("<pad>") == Vocabulary::kPad);
  CHECK(v.Id("b") == 2);
  CHECK(v.Id("A") == 3);
  CHECK(v.Id("zzz") == Vocabulary::kUnknown);
  CHECK(Vocabulary::FromTokens(v.tokens()) == v);
  CHECK_THROWS_AS(Vocabulary::FromTokens({"b", "<pad>"}), FormatError);
  CHECK_THROWS_AS(Vocabulary::FromTokens({"<pad>", "<unk>", "a", "a"}), FormatError);
}

TEST_CASE("synthetic generator is deterministic") {
  const SynthConfig cfg = SmallSynth();
  const auto a = GenerateSynthetic(cfg, 5), b = GenerateSynthetic(cfg, 5), c = GenerateSynthetic(cfg, 6);
  CHECK(FormatColumnText(a.source_train, a.tagset) == FormatColumnText(b.source_train, b.tagset));
  CHECK(FormatColumnText(a.test[1], a.tagset) == FormatColumnText(b.test[1], b.tagset));
  CHECK(FormatColumnText(a.target_train[0], a.tagset) == FormatColumnText(b.target_train[0], b.tagset));
  CHECK(a.source_train != c.source_train);
}

TEST_CASE("synthetic gold labels are valid and lengths bounded") {
  SynthConfig cfg = SmallSynth();
  cfg.max_len = 10;
  cfg.max_seq_len = 12;
  const auto bench = GenerateSynthetic(cfg, 9);
  std::vector<const Corpus *> all{&bench.source_train};
  for (const auto &d : bench.dev) all.push_back(&d);
  for (const auto &t : bench.test) all.push_back(&t);
  for (const Corpus *c : all) {
    for (const auto &s : c->sentences) {
      REQUIRE(s.labels);
      CHECK(s.labels->size() == s.tokens.size());
      CHECK(ValidateBio2(*s.labels, bench.tagset).empty());
      CHECK(s.tokens.size() >= 1);
      CHECK(static_cast<int>(s.tokens.size()) <= cfg.max_seq_len);
      for (const auto &sp : SpansFromBio2(*s.labels, bench.tagset)) CHECK(sp.end - sp.start + 1 <= cfg.max_entity_len);
    }
  }
  for (const auto &s : bench.target_train[0].sentences) CHECK_FALSE(s.labels);
  CHECK(bench.source_train.role == Role::kSourceLabeled);
  CHECK(bench.target_train[0].role == Role::kTargetUnlabeled);
}

TEST_CASE("synthetic class frequencies follow the configured weights") {
  for (const std::vector<double> &weights : {std::vector<double>{}, std::vector<double>{0.5, 0.3, 0.2}}) {
    SynthConfig cfg;
    cfg.class_weights = weights;
    cfg.source_train = 3000;
    cfg.target_train = 0;
    cfg.dev = cfg.test = 0;
    const auto bench = GenerateSynthetic(cfg, 13);
    REQUIRE(bench.source_train.num_tokens() >= 10000);
    std::vector<double> counts(3, 0.0);
    double total = 0;
    for (const auto &s : bench.source_train.sentences)
      for (const auto &sp : SpansFromBio2(*s.labels, bench.tagset)) {
        counts[sp.cls] += 1;
        total += 1;
      }
    for (int c = 0; c < 3; ++c) {
      const double want = weights.empty() ? 1.0 / 3 : weights[c];
      CHECK(std::abs(counts[c] / total - want) <= 0.1 * want);
    }
  }
}

TEST_CASE("synthetic surfaces invert under the bijection") {
  SynthConfig cfg = SmallSynth();
  cfg.languages = {"aa", "bb", "cc"};
  cfg.shared_context_rate = 0.3;
  SyntheticLexicon lex(cfg, 4);
  for (int c = 0; c < 3; ++c) {
    for (int id = 0; id < lex.num_entities(c); ++id) {
      for (const auto &a : cfg.languages) {
        const auto sa = lex.EntitySurface(c, id, a);
        for (const auto &b : cfg.languages) {
          const auto sb = lex.EntitySurface(c, id, b);
          REQUIRE(sa.size() == sb.size());
          for (std::size_t t = 0; t < sa.size(); ++t)
            CHECK(lex.Surface(lex.Base(sa[t], a), b) == sb[t]);
          if (a != b) CHECK((sa == sb) == lex.EntityShared(c, id));
        }
      }
    }
  }
  CHECK_THROWS_AS(lex.Base("nonsense", "aa"), DomainError);

  // Parallel dev splits render the same skeleton in every language.
  const auto bench = GenerateSynthetic(cfg, 4);
  SyntheticLexicon same(cfg, 4);
  for (std::size_t i = 0; i < bench.dev[0].size(); ++i) {
    const auto &s0 = bench.dev[0].sentences[i];
    for (std::size_t l = 1; l < cfg.languages.size(); ++l) {
      const auto &sl = bench.dev[l].sentences[i];
      REQUIRE(sl.tokens.size() == s0.tokens.size());
      CHECK(sl.labels == s0.labels);
      for (std::size_t t = 0; t < s0.tokens.size(); ++t)
        CHECK(same.Base(sl.tokens[t], cfg.languages[l]) == same.Base(s0.tokens[t], cfg.languages[0]));
    }
  }
}

TEST_CASE("synthetic config validation") {
  SynthConfig cfg;
  cfg.max_entity_len = 20;
  cfg.max_len = 14;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  SynthConfig one;
  one.languages = {"src"};
  CHECK_THROWS_AS(one.Validate(), ConfigError);
  SynthConfig bad;
  bad.entity_rate = 1.5;
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
  const SynthConfig d;
  const SynthConfig back = SynthConfig::FromKeyValues(d.ToKeyValues());
  CHECK(back.ToKeyValues().Serialize() == d.ToKeyValues().Serialize());
  KeyValues kv;
  kv.Set("no_such_key", "1");
  CHECK_THROWS_AS(SynthConfig::FromKeyValues(kv), ConfigError);
}

TEST_CASE("batching examples") {
  const Corpus src = Numbered(10, "en", true);
  const Corpus trg = Numbered(10, "de", false);
  Corpus c0 = Numbered(1, "en", true);
  Vocabulary vocab = Vocabulary::Build({&src, &trg});

  auto stage1 = MakeBatches({&src}, {}, 4, MixingPolicy::kSourceOnly, 3, 0, vocab, 64);
  REQUIRE(stage1.size() == 3);
  CHECK(stage1[0].size() == 4);
  CHECK(stage1[1].size() == 4);
  CHECK(stage1[2].size() == 2);

  auto stage2 = MakeBatches({&src}, {&trg}, 8, MixingPolicy::kHalfSource, 3, 0, vocab, 64);
  for (std::size_t i = 0; i + 1 < stage2.size(); ++i) {
    CHECK(stage2[i].num_role(Role::kSourceLabeled) == 4);
    CHECK(stage2[i].num_role(Role::kTargetUnlabeled) == 4);
  }
  auto odd = MakeBatches({&src}, {&trg}, 5, MixingPolicy::kHalfSource, 3, 0, vocab, 64);
  CHECK(odd[0].num_role(Role::kSourceLabeled) == 3);
  CHECK(odd[0].num_role(Role::kTargetUnlabeled) == 2);

  auto again = MakeBatches({&src}, {&trg}, 8, MixingPolicy::kHalfSource, 3, 0, vocab, 64);
  REQUIRE(again.size() == stage2.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].token_ids == stage2[i].token_ids);

  Corpus empty;
  CHECK_THROWS_AS(MakeBatches({&empty}, {}, 4, MixingPolicy::kSourceOnly, 1, 0, vocab, 64), ContractError);
  CHECK_THROWS_AS(MakeBatches({&src}, {&trg}, 1, MixingPolicy::kHalfSource, 1, 0, vocab, 64), ContractError);
}

TEST_CASE("batch padding, mask and truncation") {
  Corpus c = ParseColumnText("a\tB-PER\nb\tI-PER\nc\tO\nd\tB-LOC\n\ne\tO\n\n", kTags, "en");
  Vocabulary v = Vocabulary::Build({&c});
  Batch b = MakeBatch({&c.sentences[0], &c.sentences[1]}, {Role::kSourceLabeled, Role::kTargetUnlabeled}, v, 3);
  CHECK(b.width == 3);
  CHECK(b.lengths == std::vector<int>{3, 1});
  CHECK(b.mask == std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0});
  CHECK(b.token_ids[4] == Vocabulary::kPad);
  CHECK(b.token_ids[3] == v.Id("e"));
  REQUIRE(b.gold[0]);
  CHECK(*b.gold[0] == LabelSequence{BeginLabel(1), InsideLabel(1), kOutside});
  CHECK_FALSE(b.gold[1]);
  CHECK(b.num_tokens() == 4);
}

TEST_CASE("every sentence once per epoch") {
  const Corpus src = Numbered(37, "en", true);
  const Corpus trg = Numbered(23, "de", false);
  Vocabulary v = Vocabulary::Build({&src, &trg});
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::multiset<int> seen;
    for (const auto &b : MakeBatches({&src}, {}, 6, MixingPolicy::kSourceOnly, 11, epoch, v, 64))
      for (int i = 0; i < b.size(); ++i) seen.insert(b.token_ids[i * b.width]);
    CHECK(seen.size() == 37);
    CHECK(std::set<int>(seen.begin(), seen.end()).size() == 37);

    // Mixed: the pool that sets the epoch length is consumed exactly once.
    std::multiset<int> src_seen;
    for (const auto &b : MakeBatches({&src}, {&trg}, 6, MixingPolicy::kHalfSource, 11, epoch, v, 64))
      for (int i = 0; i < b.size(); ++i)
        if (b.roles[i] == Role::kSourceLabeled) src_seen.insert(b.token_ids[i * b.width]);
    CHECK(src_seen.size() == 37);
    CHECK(std::set<int>(src_seen.begin(), src_seen.end()).size() == 37);
  }
  auto e0 = MakeBatches({&src}, {}, 6, MixingPolicy::kSourceOnly, 11, 0, v, 64);
  auto e1 = MakeBatches({&src}, {}, 6, MixingPolicy::kSourceOnly, 11, 1, v, 64);
  CHECK(e0[0].token_ids != e1[0].token_ids);
}

TEST_CASE("source fraction") {
  const Corpus src = Numbered(10, "en", true);
  auto split = SelectSourceFraction(src, 0.2, 1);
  CHECK(split.labeled.size() == 2);
  CHECK(split.unlabeled_rest.size() == 8);
  for (const auto &s : split.unlabeled_rest.sentences) CHECK_FALSE(s.labels);
  CHECK(SelectSourceFraction(src, 1.0, 1).labeled == src);
  CHECK_THROWS_AS(SelectSourceFraction(src, 0.0, 1), ConfigError);
  auto again = SelectSourceFraction(src, 0.2, 1);
  CHECK(again.labeled == split.labeled);
}

}  // TEST_SUITE
