// tests/unit/evaluation_test.cc

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dualner/eval/evaluation.h"
#include "dualner/model/model.h"
#include "dualner/util/error.h"
#include "../common/oracles.h"

using namespace dualner;

namespace {

const TagSet kTags = TagSet::Default();
const int LOC = 0, PER = 1, ORG = 2;

MatchCounts BruteForce(const std::vector<EntitySpan> &pred, const std::vector<EntitySpan> &gold) {
  MatchCounts c;
  oracles::BruteForceMatch(pred, gold, &c.tp, &c.fp, &c.fn);
  return c;
}

struct Fixture {
  Corpus corpus;
  ModelParams<float> model;
  Fixture() {
    corpus = ParseColumnText(
        "# lang=en\nJohn\tB-PER\nlives\tO\nin\tO\nParis\tB-LOC\n\n"
        "# lang=de\nAnna\tB-PER\nwohnt\tO\nin\tO\nNew\tB-LOC\nYork\tI-LOC\n\n"
        "# lang=en\nACME\tB-ORG\nhires\tO\n\n",
        kTags);
    const Vocabulary vocab = Vocabulary::Build({&corpus});
    EncoderConfig c;
    c.vocab_size = vocab.size();
    c.d_model = 8;
    c.layers = 1;
    c.ffn = 16;
    c.max_len = 16;
    model = InitModel<float>(c, kTags, vocab, 2);
    // Large random span heads so that spans are predicted.
    std::mt19937_64 rng(4);
    for (auto *w : {&model.start_w, &model.end_w})
      for (auto &v : w->value.storage()) v = static_cast<float>(8 * (UniformUnit(rng) - 0.5));
  }
};

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("entity f1 examples") {
  const std::vector<EntitySpan> gold{{0, 1, PER}, {3, 3, LOC}};
  const MatchCounts same = EntityF1(gold, gold);
  CHECK(same.precision() == 1.0);
  CHECK(same.recall() == 1.0);
  CHECK(same.f1() == 1.0);

  const MatchCounts none = EntityF1({}, gold);
  CHECK(none.precision() == 0.0);
  CHECK(none.recall() == 0.0);
  CHECK(none.f1() == 0.0);

  const MatchCounts half = EntityF1({{0, 1, PER}, {3, 3, ORG}}, gold);
  CHECK(half == MatchCounts{1, 1, 1});
  CHECK(half.f1() == 0.5);
  CHECK(MatchCounts{}.f1() == 0.0);
}

TEST_CASE("entity f1 matches the brute-force matcher") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    const auto gold = oracles::RandomSpans(rng, n);
    const auto pred = rng() % 4 == 0 ? oracles::RandomSpans(rng, n) : oracles::PerturbSpans(gold, rng, n);
    const MatchCounts c = EntityF1(pred, gold);
    CHECK(c == BruteForce(pred, gold));
    CHECK(c.f1() >= 0.0);
    CHECK(c.f1() <= 1.0);
    auto rp = pred, rg = gold;
    std::shuffle(rp.begin(), rp.end(), rng);
    std::shuffle(rg.begin(), rg.end(), rng);
    CHECK(EntityF1(rp, rg) == c);
    // Swapping roles swaps FP and FN.
    const MatchCounts s = EntityF1(gold, pred);
    CHECK(s.tp == c.tp);
    CHECK(s.fp == c.fn);
    CHECK(s.fn == c.fp);
    CHECK(s.f1() == doctest::Approx(c.f1()).epsilon(1e-12));
  }
}

TEST_CASE("score report: micro over languages equals summed counts") {
  Fixture f;
  std::mt19937_64 rng(5);
  std::vector<std::vector<EntitySpan>> pred;
  for (const auto &s : f.corpus.sentences) {
    const auto gold = SpansFromBio2(*s.labels, kTags);
    pred.push_back(oracles::PerturbSpans(gold, rng, static_cast<int>(s.tokens.size())));
  }
  const ScoreReport r = ScoreSpans(pred, f.corpus, kTags);
  MatchCounts sum, by_class;
  for (const auto &[lang, c] : r.by_language) sum += c;
  for (const auto &[cls, c] : r.by_class) by_class += c;
  CHECK(sum == r.total);
  CHECK(by_class == r.total);
  CHECK(r.by_language.count("en") == 1);
  CHECK(r.by_language.count("de") == 1);
  CHECK_THROWS_AS(ScoreSpans({}, f.corpus, kTags), ContractError);
}

TEST_CASE("score report serialization") {
  ScoreReport r;
  r.total = {1, 1, 1};
  r.by_language["de"] = {1, 1, 1};
  const std::string s = r.Serialize();
  CHECK(s.rfind("tp=1\nfp=1\nfn=1\n", 0) == 0);
  CHECK(s.find("\nf1=0.5\n") != std::string::npos);
  CHECK(s.find("lang.de.f1=0.5\n") != std::string::npos);
}

TEST_CASE("decode uses the span heads and agrees with sequential") {
  Fixture f;
  const auto all = DecodeCorpus(f.model, f.corpus, 2);
  REQUIRE(all.size() == f.corpus.size());
  std::size_t spans = 0;
  for (std::size_t i = 0; i < f.corpus.size(); ++i) {
    const auto &s = f.corpus.sentences[i];
    const auto single = Decode(f.model, s);
    CHECK(single == all[i]);
    const Batch b = MakeBatch({&s}, {Role::kSourceLabeled}, f.model.vocab, 64);
    const auto pred = PredictBatch(f.model, b)[0];
    CHECK(single == SpansFromBio2(Sequential(pred.start, pred.end), kTags));
    for (std::size_t k = 1; k < single.size(); ++k) CHECK(single[k - 1].end < single[k].start);
    spans += single.size();
  }
  CHECK(spans > 0);
  // The sequence-labeling head is not consulted.
  ModelParams<float> other = f.model;
  for (auto &v : other.sla_w.value.storage()) v += 3.0f;
  CHECK(DecodeCorpus(other, f.corpus) == all);
  // Predicted BIO2 follows the decoded spans.
  const Corpus pc = Predict(f.model, f.corpus);
  for (std::size_t i = 0; i < pc.size(); ++i)
    CHECK(SpansFromBio2(*pc.sentences[i].labels, kTags) == all[i]);
  // Uniform model: deterministic, ties go to O so nothing is predicted.
  ModelParams<float> flat = f.model;
  for (auto *w : {&flat.start_w, &flat.start_b, &flat.end_w, &flat.end_b}) w->value.SetZero();
  for (const auto &s : DecodeCorpus(flat, f.corpus)) CHECK(s.empty());
}

TEST_CASE("evaluate and pooled evaluation") {
  Fixture f;
  const ScoreReport direct = ScoreSpans(DecodeCorpus(f.model, f.corpus), f.corpus, kTags);
  CHECK(Evaluate(f.model, f.corpus).Serialize() == direct.Serialize());
  Corpus a, b;
  a.sentences = {f.corpus.sentences[0], f.corpus.sentences[2]};
  b.sentences = {f.corpus.sentences[1]};
  const ScoreReport pooled = EvaluatePooled(f.model, {a, b});
  MatchCounts sum = Evaluate(f.model, a).total;
  sum += Evaluate(f.model, b).total;
  CHECK(pooled.total == sum);
}

TEST_CASE("entity representation export") {
  Fixture f;
  const int width = 2 * f.model.config.d_model;
  const std::string header = FormatEntityRepresentations({}, kTags, width);
  CHECK(header.rfind("sentence\tlanguage\tclass\tstart\tend\tr0\t", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), '\n') == 1);

  const auto reps = CollectEntityRepresentations(f.model, f.corpus, 2);
  std::size_t spans = 0;
  for (const auto &s : DecodeCorpus(f.model, f.corpus)) spans += s.size();
  CHECK(reps.size() == spans);
  for (const auto &r : reps) CHECK(r.vector.size() == static_cast<std::size_t>(width));

  const std::string path = (std::filesystem::temp_directory_path() / "dualner_eval_reps.tsv").string();
  DumpEntityRepresentations(f.model, f.corpus, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == spans + 1);
  CHECK(text == FormatEntityRepresentations(reps, kTags, width));
  const auto back = ReadEntityRepresentations(path, kTags);
  REQUIRE(back.size() == reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    CHECK(back[i].cls == reps[i].cls);
    CHECK(back[i].language == reps[i].language);
    CHECK(back[i].span == reps[i].span);
    for (int k = 0; k < width; ++k) CHECK(back[i].vector[k] == doctest::Approx(reps[i].vector[k]).epsilon(1e-5));
  }

  Corpus empty;
  DumpEntityRepresentations(f.model, empty, path);
  std::ifstream in2(path);
  std::stringstream s2;
  s2 << in2.rdbuf();
  CHECK(s2.str() == header);
  std::remove(path.c_str());
}

TEST_CASE("cross-language distance") {
  auto rep = [](std::vector<float> v, int cls, const char *lang) {
    EntityRepresentation r;
    r.vector = std::move(v);
    r.cls = cls;
    r.language = lang;
    return r;
  };
  CHECK(CrossLanguageDistance({}) == 0.0);
  CHECK(CrossLanguageDistance({rep({0, 0}, 0, "a"), rep({3, 4}, 0, "a")}) == 0.0);
  CHECK(CrossLanguageDistance({rep({0, 0}, 0, "a"), rep({3, 4}, 0, "b"), rep({9, 9}, 1, "b")}) ==
        doctest::Approx(5.0));
  CHECK(CrossLanguageDistance({rep({0, 0}, 0, "a"), rep({3, 4}, 0, "b"), rep({6, 8}, 0, "b")}) ==
        doctest::Approx(7.5));
}

}  // TEST_SUITE
