// tests/unit/model_test.cc

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
#include <fstream>
#include <random>

#include "doctest.h"
#include "dualner/data/batching.h"
#include "dualner/model/checkpoint.h"
#include "dualner/model/model.h"
#include "dualner/util/error.h"

using namespace dualner;

namespace {

const TagSet kTags = TagSet::Default();

struct Fixture {
  Corpus corpus;
  Vocabulary vocab;
  EncoderConfig config;

  Fixture() {
    corpus = ParseColumnText(
        "# lang=en\nJohn\tB-PER\nlives\tO\nin\tO\nParis\tB-LOC\n\n"
        "# lang=de\nAnna\tB-PER\nwohnt\tO\nin\tO\nNew\tB-LOC\nYork\tI-LOC\n\n"
        "# lang=en\nACME\tB-ORG\nhires\tO\n\n",
        kTags);
    vocab = Vocabulary::Build({&corpus});
    config.vocab_size = vocab.size();
    config.d_model = 16;
    config.layers = 2;
    config.heads = 2;
    config.ffn = 32;
    config.max_len = 16;
  }
  Batch MakeAll(std::vector<int> order = {0, 1, 2}) const {
    std::vector<const Sentence *> ss;
    for (int i : order) ss.push_back(&corpus.sentences[i]);
    return MakeBatch(ss, std::vector<Role>(ss.size(), Role::kSourceLabeled), vocab, 16);
  }
};

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("dualner_model_" + name)).string();
}

void CheckRowsNormalized(const Tensor &t) {
  for (int r = 0; r < t.rows(); ++r) {
    double s = 0;
    for (float v : t.row(r)) {
      CHECK(v >= 0.0f);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-6);
  }
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("config validation") {
  EncoderConfig c;
  c.vocab_size = 10;
  CHECK_NOTHROW(c.Validate());
  c.heads = 3;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c.heads = 2;
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c.dropout = 0.1;
  c.vocab_size = 0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
}

TEST_CASE("encode shapes and head widths") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  const Batch b = f.MakeAll();
  Graph<float> g(false);
  auto pass = Forward(g, p, b, {});
  const Tensor h = PaddedHidden(pass.encoded, b);
  CHECK(h.shape() == std::vector<int>{3, 5, 16});
  CHECK(pass.sla_logits.value().shape() == std::vector<int>{11, 7});
  CHECK(pass.start_logits.value().shape() == std::vector<int>{11, 4});
  CHECK(pass.end_logits.value().shape() == std::vector<int>{11, 4});
  // Padding rows of the padded view are zero.
  for (int t = 4; t < 5; ++t)
    for (int k = 0; k < 16; ++k) CHECK(h[(0 * 5 + t) * 16 + k] == 0.0f);
}

TEST_CASE("out of range token id is a domain error") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  Batch b = f.MakeAll();
  b.token_ids[0] = f.vocab.size() + 5;
  Graph<float> g(false);
  CHECK_THROWS_AS(Encode(g, p, b, {}), DomainError);
}

TEST_CASE("eval mode is deterministic, train mode follows the dropout seed") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  const Batch b = f.MakeAll();
  auto run = [&](ForwardOptions o) {
    Graph<float> g(false);
    return Forward(g, p, b, o).sla_logits.value();
  };
  CHECK(run({}) == run({}));
  CHECK(run({true, 7}) == run({true, 7}));
  CHECK(run({true, 7}) != run({true, 8}));
  CHECK(run({true, 7}) != run({}));
}

TEST_CASE("permuting sentences permutes hidden states") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 5);
  const Batch a = f.MakeAll({0, 1, 2}), b = f.MakeAll({2, 0, 1});
  Graph<float> ga(false), gb(false);
  const Tensor ha = PaddedHidden(Encode(ga, p, a, {}), a);
  const Tensor hb = PaddedHidden(Encode(gb, p, b, {}), b);
  const int w = a.width, d = f.config.d_model;
  const int perm[3] = {2, 0, 1};  // b's sentence i is a's perm[i]
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < w; ++t)
      for (int k = 0; k < d; ++k)
        CHECK(hb[(i * w + t) * d + k] == doctest::Approx(ha[(perm[i] * w + t) * d + k]).epsilon(1e-5));
}

TEST_CASE("prediction rows are distributions; zero heads give uniform rows") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  const Batch b = f.MakeAll();
  for (const auto &t : PredictBatch(p, b)) {
    CheckRowsNormalized(t.sla);
    CheckRowsNormalized(t.start);
    CheckRowsNormalized(t.end);
    CHECK(t.sla.rows() == t.start.rows());
    CHECK(t.end.rows() == t.start.rows());
  }
  p.sla_w.value.SetZero();
  p.start_w.value.SetZero();
  for (const auto &t : PredictBatch(p, b)) {
    for (float v : t.sla.values()) CHECK(v == doctest::Approx(1.0 / 7).epsilon(1e-6));
    for (float v : t.start.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-6));
  }
}

TEST_CASE("span heads are independent") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  const Batch b = f.MakeAll();
  const auto before = PredictBatch(p, b);
  for (auto &v : p.start_w.value.storage()) v += 0.5f;
  const auto after = PredictBatch(p, b);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i].end == before[i].end);
    CHECK(after[i].sla == before[i].sla);
    CHECK(after[i].start != before[i].start);
  }
}

TEST_CASE("sequential decoding is valid BIO2 under random parameter draws") {
  Fixture f;
  f.config.d_model = 8;
  f.config.layers = 1;
  f.config.ffn = 8;
  const Batch b = f.MakeAll();
  std::mt19937_64 rng(17);
  for (int draw = 0; draw < 1000; ++draw) {
    auto p = InitModel<float>(f.config, kTags, f.vocab, rng());
    const float gain = static_cast<float>(1.0 + 20.0 * UniformUnit(rng));
    for (auto *w : {&p.start_w, &p.end_w, &p.start_b, &p.end_b})
      for (auto &v : w->value.storage()) v = static_cast<float>(gain * (UniformUnit(rng) - 0.5));
    for (const auto &t : PredictBatch(p, b)) {
      const auto y = Sequential(t.start, t.end);
      CHECK(y.size() == static_cast<std::size_t>(t.length()));
      CHECK(ValidateBio2(y, kTags).empty());
    }
  }
}

TEST_CASE("entity representations") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  const Batch b = f.MakeAll();
  Graph<float> g(false);
  auto pass = Forward(g, p, b, {});
  auto preds = Predictions(pass);
  const int d = f.config.d_model;

  SUBCASE("no spans") {
    for (auto &t : preds) {
      t.start.SetZero();
      t.end.SetZero();
      for (int r = 0; r < t.length(); ++r) t.start.at(r, 0) = t.end.at(r, 0) = 1.0f;
    }
    CHECK(EntityRepresentations(pass.encoded, b, preds).empty());
  }
  SUBCASE("single token span") {
    for (auto &t : preds) {
      t.start.SetZero();
      t.end.SetZero();
      for (int r = 0; r < t.length(); ++r) t.start.at(r, 0) = t.end.at(r, 0) = 1.0f;
    }
    preds[1].start.at(2, 0) = preds[1].end.at(2, 0) = 0.0f;
    preds[1].start.at(2, SpanLabel(2)) = preds[1].end.at(2, SpanLabel(2)) = 1.0f;
    const auto reps = EntityRepresentations(pass.encoded, b, preds);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].vector.size() == static_cast<std::size_t>(2 * d));
    CHECK(reps[0].cls == 2);
    CHECK(reps[0].language == "de");
    CHECK(reps[0].sentence == 1);
    CHECK(reps[0].span == EntitySpan{2, 2, 2});
    const Tensor h = PaddedHidden(pass.encoded, b);
    for (int k = 0; k < d; ++k) {
      CHECK(reps[0].vector[k] == h[(1 * b.width + 2) * d + k]);
      CHECK(reps[0].vector[d + k] == h[(1 * b.width + 2) * d + k]);
    }
  }
  SUBCASE("consistent with sequential decoding") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      for (auto &t : preds) {
        for (Tensor *x : {&t.start, &t.end})
          for (int r = 0; r < x->rows(); ++r) {
            x->row(r)[0] = 0.0f;
            for (auto &v : x->row(r)) v = static_cast<float>(UniformUnit(rng));
            x->row(r)[0] *= 1.5f;
          }
      }
      const auto reps = EntityRepresentations(pass.encoded, b, preds);
      std::vector<std::vector<EntitySpan>> from_reps(preds.size());
      for (const auto &r : reps) from_reps[r.sentence].push_back(r.span);
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto seq = SpansFromBio2(Sequential(preds[i].start, preds[i].end), kTags);
        CHECK(from_reps[i] == seq);
      }
      CHECK(PredictedSpans(preds) == from_reps);
    }
  }
}

TEST_CASE("shared encoder receives gradient from the sequence-labeling head") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 3);
  const Batch b = f.MakeAll();
  Graph<float> g;
  auto pass = Forward(g, p, b, {});
  std::vector<int> targets(b.num_tokens(), 1);
  g.Backward(SoftmaxCrossEntropy(pass.sla_logits, targets,
                                 std::vector<double>(targets.size(), 1.0)));
  double emb = 0, start = 0;
  for (float v : p.embedding.grad.values()) emb += std::abs(v);
  for (float v : p.start_w.grad.values()) start += std::abs(v);
  CHECK(emb > 0);
  CHECK(start == 0);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 11);
  const std::string path = TempPath("rt.ckpt");
  SaveCheckpoint(p, path);
  auto q = LoadCheckpoint(path);
  CHECK(IdenticalParams(p, q));
  CHECK(q.config == p.config);
  CHECK(q.vocab == p.vocab);
  CHECK(q.tagset == p.tagset);
  auto all_p = p.All();
  auto all_q = q.All();
  REQUIRE(all_p.size() == all_q.size());
  for (std::size_t i = 0; i < all_p.size(); ++i) {
    CHECK(all_p[i]->name == all_q[i]->name);
    CHECK(all_p[i]->value == all_q[i]->value);
  }
  // Loads as both teacher and student; predictions agree.
  auto teacher = LoadCheckpoint(path), student = LoadCheckpoint(path);
  const Batch b = f.MakeAll();
  const auto pt = PredictBatch(teacher, b), ps = PredictBatch(student, b), pp = PredictBatch(p, b);
  for (std::size_t i = 0; i < pt.size(); ++i) {
    CHECK(pt[i].sla == ps[i].sla);
    CHECK(pt[i].sla == pp[i].sla);
  }
  CHECK(SerializeCheckpoint(q) == SerializeCheckpoint(p));
  std::remove(path.c_str());
}

TEST_CASE("checkpoint corruption is rejected") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 11);
  const std::string bytes = SerializeCheckpoint(p);
  CHECK(bytes.substr(0, 4) == "DNER");
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(DeserializeCheckpoint(bad), FormatError);
  bad = bytes;
  bad[4] = 9;  // version
  CHECK_THROWS_AS(DeserializeCheckpoint(bad), FormatError);
  for (std::size_t cut : {std::size_t(2), std::size_t(10), bytes.size() / 2, bytes.size() - 1})
    CHECK_THROWS_AS(DeserializeCheckpoint(bytes.substr(0, cut)), FormatError);
  CHECK_THROWS_AS(DeserializeCheckpoint(bytes + "x"), FormatError);
  CHECK_THROWS_AS(LoadCheckpoint(TempPath("missing.ckpt")), IoError);
}

TEST_CASE("vocabulary extension keeps predictions") {
  Fixture f;
  auto p = InitModel<float>(f.config, kTags, f.vocab, 11);
  Corpus extra = ParseColumnText("Berlin\nzzz\nJohn\n", kTags, "de");
  const Batch before_batch = MakeBatch({&extra.sentences[0]}, {Role::kTargetUnlabeled}, p.vocab, 16);
  const auto before = PredictBatch(p, before_batch);
  const int old = p.vocab.size();
  ExtendVocabulary(p, {&extra});
  CHECK(p.vocab.size() == old + 2);
  CHECK(p.config.vocab_size == p.vocab.size());
  CHECK(p.embedding.value.rows() == p.vocab.size());
  CHECK(p.vocab.Id("John") == f.vocab.Id("John"));
  const Batch after_batch = MakeBatch({&extra.sentences[0]}, {Role::kTargetUnlabeled}, p.vocab, 16);
  CHECK(after_batch.token_ids != before_batch.token_ids);
  const auto after = PredictBatch(p, after_batch);
  CHECK(after[0].sla == before[0].sla);
  CHECK(after[0].start == before[0].start);
}

}  // TEST_SUITE
