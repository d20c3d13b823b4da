// eval/evaluation.cc

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

#include "dualner/eval/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dualner/util/error.h"
#include "dualner/util/key_value.h"

namespace dualner {

double MatchCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double MatchCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double MatchCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

MatchCounts &MatchCounts::operator+=(const MatchCounts &o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

namespace {

void AppendCounts(std::ostringstream &os, const std::string &prefix, const MatchCounts &c) {
  os << prefix << "tp=" << c.tp << "\n"
     << prefix << "fp=" << c.fp << "\n"
     << prefix << "fn=" << c.fn << "\n"
     << prefix << "precision=" << FormatDouble(c.precision()) << "\n"
     << prefix << "recall=" << FormatDouble(c.recall()) << "\n"
     << prefix << "f1=" << FormatDouble(c.f1()) << "\n";
}

}  // namespace

std::string ScoreReport::Serialize() const {
  std::ostringstream os;
  AppendCounts(os, "", total);
  for (const auto &[lang, c] : by_language) AppendCounts(os, "lang." + lang + ".", c);
  for (const auto &[cls, c] : by_class) AppendCounts(os, "class." + cls + ".", c);
  return os.str();
}

MatchCounts EntityF1(const std::vector<EntitySpan> &predicted, const std::vector<EntitySpan> &gold) {
  std::vector<EntitySpan> p(predicted), g(gold);
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  MatchCounts c;
  std::size_t i = 0, j = 0;
  while (i < p.size() && j < g.size()) {
    if (p[i] == g[j]) {
      ++c.tp;
      ++i;
      ++j;
    } else if (p[i] < g[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  c.fp = static_cast<long>(p.size()) - c.tp;
  c.fn = static_cast<long>(g.size()) - c.tp;
  return c;
}

ScoreReport ScoreSpans(const std::vector<std::vector<EntitySpan>> &predicted, const Corpus &gold,
                       const TagSet &tagset) {
  if (predicted.size() != gold.size())
    throw ContractError("prediction count does not match gold sentence count");
  ScoreReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Sentence &s = gold.sentences[i];
    if (!s.labels) throw ContractError("gold sentence without labels");
    const auto g = SpansFromBio2(*s.labels, tagset, true);
    const MatchCounts c = EntityF1(predicted[i], g);
    r.total += c;
    r.by_language[s.language] += c;
    for (int k = 0; k < tagset.num_classes(); ++k) {
      std::vector<EntitySpan> pk, gk;
      for (const auto &e : predicted[i])
        if (e.cls == k) pk.push_back(e);
      for (const auto &e : g)
        if (e.cls == k) gk.push_back(e);
      r.by_class[tagset.class_name(k)] += EntityF1(pk, gk);
    }
  }
  return r;
}

namespace {

template <typename Fn>
void ForEachBatch(ModelParams<float> &params, const Corpus &corpus, int batch_size, Fn fn) {
  if (batch_size < 1) throw ContractError("batch size must be positive");
  for (std::size_t begin = 0; begin < corpus.size(); begin += batch_size) {
    const std::size_t end = std::min(corpus.size(), begin + batch_size);
    std::vector<const Sentence *> ss;
    for (std::size_t i = begin; i < end; ++i) ss.push_back(&corpus.sentences[i]);
    const Batch batch = MakeBatch(ss, std::vector<Role>(ss.size(), Role::kTargetUnlabeled),
                                  params.vocab, params.config.max_len);
    fn(batch);
  }
}

}  // namespace

std::vector<EntitySpan> Decode(ModelParams<float> &params, const Sentence &sentence) {
  const Batch batch = MakeBatch({&sentence}, {Role::kTargetUnlabeled}, params.vocab,
                                params.config.max_len);
  return PredictedSpans(PredictBatch(params, batch)).front();
}

std::vector<std::vector<EntitySpan>> DecodeCorpus(ModelParams<float> &params, const Corpus &corpus,
                                                  int batch_size) {
  std::vector<std::vector<EntitySpan>> out;
  ForEachBatch(params, corpus, batch_size, [&](const Batch &batch) {
    for (auto &spans : PredictedSpans(PredictBatch(params, batch))) out.push_back(std::move(spans));
  });
  return out;
}

ScoreReport Evaluate(ModelParams<float> &params, const Corpus &gold, int batch_size) {
  return ScoreSpans(DecodeCorpus(params, gold, batch_size), gold, params.tagset);
}

ScoreReport EvaluatePooled(ModelParams<float> &params, const std::vector<Corpus> &golds,
                           int batch_size) {
  return Evaluate(params, Concatenate(golds), batch_size);
}

Corpus Predict(ModelParams<float> &params, const Corpus &corpus, int batch_size) {
  Corpus out = corpus;
  const auto spans = DecodeCorpus(params, corpus, batch_size);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Sentence &s = out.sentences[i];
    s.labels = Bio2FromSpans(spans[i], static_cast<int>(s.tokens.size()));
  }
  out.role = Role::kSourceLabeled;
  return out;
}

std::vector<EntityRepresentation> CollectEntityRepresentations(ModelParams<float> &params,
                                                               const Corpus &corpus,
                                                               int batch_size) {
  std::vector<EntityRepresentation> out;
  int offset = 0;
  ForEachBatch(params, corpus, batch_size, [&](const Batch &batch) {
    Graph<float> g(false);
    const ForwardPass<float> pass = Forward(g, params, batch, ForwardOptions{});
    for (auto &r : EntityRepresentations(pass.encoded, batch, Predictions(pass))) {
      r.sentence += offset;
      out.push_back(std::move(r));
    }
    offset += batch.size();
  });
  return out;
}

std::string FormatEntityRepresentations(const std::vector<EntityRepresentation> &reps,
                                        const TagSet &tagset, int width) {
  std::ostringstream os;
  os << "sentence\tlanguage\tclass\tstart\tend";
  for (int j = 0; j < width; ++j) os << "\tr" << j;
  os << "\n";
  char buf[32];
  for (const auto &r : reps) {
    if (static_cast<int>(r.vector.size()) != width)
      throw ContractError("representation width mismatch");
    os << r.sentence << "\t" << r.language << "\t" << tagset.class_name(r.cls) << "\t"
       << r.span.start << "\t" << r.span.end;
    for (float v : r.vector) {
      std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(v));
      os << "\t" << buf;
    }
    os << "\n";
  }
  return os.str();
}

void DumpEntityRepresentations(ModelParams<float> &params, const Corpus &corpus,
                               const std::string &path) {
  const std::string text = FormatEntityRepresentations(
      CollectEntityRepresentations(params, corpus), params.tagset, 2 * params.config.d_model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<EntityRepresentation> ReadEntityRepresentations(const std::string &path,
                                                            const TagSet &tagset) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header in " + path);
  const std::size_t width = SplitList(line, '\t').size() - 5;
  std::vector<EntityRepresentation> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = SplitList(line, '\t');
    if (f.size() != width + 5) throw ParseError("wrong field count", lineno);
    try {
      EntityRepresentation r;
      r.sentence = std::stoi(f[0]);
      r.language = f[1];
      const auto cls = tagset.ClassIndex(f[2]);
      if (!cls) throw ParseError("unknown class " + f[2], lineno);
      r.cls = *cls;
      r.span = {std::stoi(f[3]), std::stoi(f[4]), r.cls};
      for (std::size_t j = 0; j < width; ++j) r.vector.push_back(std::stof(f[5 + j]));
      out.push_back(std::move(r));
    } catch (const std::logic_error &) {
      throw ParseError("malformed number", lineno);
    }
  }
  return out;
}

double CrossLanguageDistance(const std::vector<EntityRepresentation> &reps) {
  double sum = 0.0;
  long pairs = 0;
  for (std::size_t a = 0; a < reps.size(); ++a) {
    for (std::size_t b = a + 1; b < reps.size(); ++b) {
      if (reps[a].cls != reps[b].cls || reps[a].language == reps[b].language) continue;
      double d2 = 0.0;
      for (std::size_t j = 0; j < reps[a].vector.size(); ++j) {
        const double d = double(reps[a].vector[j]) - double(reps[b].vector[j]);
        d2 += d * d;
      }
      sum += std::sqrt(d2);
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

}  // namespace dualner
