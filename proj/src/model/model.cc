// model/model.cc

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

#include "dualner/model/model.h"

#include <cmath>
#include <random>
#include <unordered_set>

#include "dualner/util/error.h"

namespace dualner {

void EncoderConfig::Validate() const {
  if (vocab_size < 2 || d_model < 1 || layers < 0 || heads < 1 || ffn < 1 || max_len < 1)
    throw ConfigError("encoder dimensions must be positive");
  if (d_model % heads != 0) throw ConfigError("d_model must be divisible by heads");
  if (d_model % 2 != 0) throw ConfigError("d_model must be even (sinusoidal positions)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(word_dropout >= 0.0 && word_dropout < 1.0))
    throw ConfigError("word_dropout must be in [0, 1)");
}

template <typename Real>
std::vector<Parameter<Real> *> ModelParams<Real>::All() {
  std::vector<Parameter<Real> *> out{&embedding};
  for (auto &b : blocks) {
    for (auto *p : {&b.ln1_gain, &b.ln1_bias, &b.wq, &b.bq, &b.wk, &b.bk, &b.wv, &b.bv, &b.wo,
                    &b.bo, &b.ln2_gain, &b.ln2_bias, &b.w1, &b.b1, &b.w2, &b.b2})
      out.push_back(p);
  }
  for (auto *p : {&final_gain, &final_bias, &sla_w, &sla_b, &start_w, &start_b, &end_w, &end_b})
    out.push_back(p);
  return out;
}

template <typename Real>
std::vector<const Parameter<Real> *> ModelParams<Real>::All() const {
  auto mut = const_cast<ModelParams<Real> *>(this)->All();
  return {mut.begin(), mut.end()};
}

template <typename Real>
void ModelParams<Real>::ZeroGrad() {
  for (auto *p : All()) p->ZeroGrad();
}

template <typename Real>
template <typename Other>
ModelParams<Other> ModelParams<Real>::Cast() const {
  ModelParams<Other> out;
  out.config = config;
  out.tagset = tagset;
  out.vocab = vocab;
  out.embedding = embedding.template Cast<Other>();
  for (const auto &b : blocks) {
    BlockParams<Other> o;
    o.ln1_gain = b.ln1_gain.template Cast<Other>();
    o.ln1_bias = b.ln1_bias.template Cast<Other>();
    o.wq = b.wq.template Cast<Other>();
    o.bq = b.bq.template Cast<Other>();
    o.wk = b.wk.template Cast<Other>();
    o.bk = b.bk.template Cast<Other>();
    o.wv = b.wv.template Cast<Other>();
    o.bv = b.bv.template Cast<Other>();
    o.wo = b.wo.template Cast<Other>();
    o.bo = b.bo.template Cast<Other>();
    o.ln2_gain = b.ln2_gain.template Cast<Other>();
    o.ln2_bias = b.ln2_bias.template Cast<Other>();
    o.w1 = b.w1.template Cast<Other>();
    o.b1 = b.b1.template Cast<Other>();
    o.w2 = b.w2.template Cast<Other>();
    o.b2 = b.b2.template Cast<Other>();
    out.blocks.push_back(std::move(o));
  }
  out.final_gain = final_gain.template Cast<Other>();
  out.final_bias = final_bias.template Cast<Other>();
  out.sla_w = sla_w.template Cast<Other>();
  out.sla_b = sla_b.template Cast<Other>();
  out.start_w = start_w.template Cast<Other>();
  out.start_b = start_b.template Cast<Other>();
  out.end_w = end_w.template Cast<Other>();
  out.end_b = end_b.template Cast<Other>();
  return out;
}

namespace {

double StandardNormal(std::mt19937_64 &rng) {
  // Box-Muller on portable uniforms.
  double u1 = UniformUnit(rng);
  const double u2 = UniformUnit(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

template <typename Real>
Parameter<Real> Normal(const std::string &name, int rows, int cols, std::mt19937_64 &rng) {
  BasicTensor<Real> t({rows, cols});
  const double sd = 1.0 / std::sqrt(static_cast<double>(rows));
  for (auto &v : t.storage()) v = static_cast<Real>(sd * StandardNormal(rng));
  return Parameter<Real>(name, std::move(t));
}

template <typename Real>
Parameter<Real> Filled(const std::string &name, int n, double v) {
  return Parameter<Real>(name, BasicTensor<Real>({n}, static_cast<Real>(v)));
}

}  // namespace

template <typename Real>
ModelParams<Real> InitModel(const EncoderConfig &config, const TagSet &tagset,
                            const Vocabulary &vocab, std::uint64_t seed) {
  config.Validate();
  if (config.vocab_size != vocab.size())
    throw ConfigError("encoder vocab_size does not match the vocabulary");
  std::mt19937_64 rng(seed);
  const int d = config.d_model;
  ModelParams<Real> p;
  p.config = config;
  p.tagset = tagset;
  p.vocab = vocab;
  BasicTensor<Real> emb({config.vocab_size, d});
  for (auto &v : emb.storage()) v = static_cast<Real>(-0.1 + 0.2 * UniformUnit(rng));
  p.embedding = Parameter<Real>("embedding", std::move(emb));
  for (int l = 0; l < config.layers; ++l) {
    const std::string pre = "block" + std::to_string(l) + ".";
    BlockParams<Real> b;
    b.ln1_gain = Filled<Real>(pre + "ln1.gain", d, 1.0);
    b.ln1_bias = Filled<Real>(pre + "ln1.bias", d, 0.0);
    b.wq = Normal<Real>(pre + "attn.wq", d, d, rng);
    b.bq = Filled<Real>(pre + "attn.bq", d, 0.0);
    b.wk = Normal<Real>(pre + "attn.wk", d, d, rng);
    b.bk = Filled<Real>(pre + "attn.bk", d, 0.0);
    b.wv = Normal<Real>(pre + "attn.wv", d, d, rng);
    b.bv = Filled<Real>(pre + "attn.bv", d, 0.0);
    b.wo = Normal<Real>(pre + "attn.wo", d, d, rng);
    b.bo = Filled<Real>(pre + "attn.bo", d, 0.0);
    b.ln2_gain = Filled<Real>(pre + "ln2.gain", d, 1.0);
    b.ln2_bias = Filled<Real>(pre + "ln2.bias", d, 0.0);
    b.w1 = Normal<Real>(pre + "ffn.w1", d, config.ffn, rng);
    b.b1 = Filled<Real>(pre + "ffn.b1", config.ffn, 0.0);
    b.w2 = Normal<Real>(pre + "ffn.w2", config.ffn, d, rng);
    b.b2 = Filled<Real>(pre + "ffn.b2", d, 0.0);
    p.blocks.push_back(std::move(b));
  }
  p.final_gain = Filled<Real>("final.gain", d, 1.0);
  p.final_bias = Filled<Real>("final.bias", d, 0.0);
  p.sla_w = Normal<Real>("head.sla.w", d, tagset.num_sequence_labels(), rng);
  p.sla_b = Filled<Real>("head.sla.b", tagset.num_sequence_labels(), 0.0);
  p.start_w = Normal<Real>("head.start.w", d, tagset.num_span_labels(), rng);
  p.start_b = Filled<Real>("head.start.b", tagset.num_span_labels(), 0.0);
  p.end_w = Normal<Real>("head.end.w", d, tagset.num_span_labels(), rng);
  p.end_b = Filled<Real>("head.end.b", tagset.num_span_labels(), 0.0);
  return p;
}

namespace {

template <typename Real>
BasicTensor<Real> Positions(const std::vector<Segment> &segments, int total, int d) {
  BasicTensor<Real> pe({total, d});
  for (const Segment &s : segments) {
    for (int pos = 0; pos < s.length; ++pos) {
      for (int i = 0; i < d / 2; ++i) {
        const double angle = pos / std::pow(10000.0, 2.0 * i / d);
        pe.at(s.begin + pos, 2 * i) = static_cast<Real>(std::sin(angle));
        pe.at(s.begin + pos, 2 * i + 1) = static_cast<Real>(std::cos(angle));
      }
    }
  }
  return pe;
}

template <typename Real>
Var<Real> Linear(Graph<Real> &g, const Var<Real> &x, Parameter<Real> &w, Parameter<Real> &b) {
  return AddBias(MatMul(x, g.Param(w)), g.Param(b));
}

}  // namespace

template <typename Real>
EncodedBatch<Real> Encode(Graph<Real> &g, ModelParams<Real> &p, const Batch &batch,
                          const ForwardOptions &options) {
  const EncoderConfig &cfg = p.config;
  EncodedBatch<Real> out;
  std::vector<int> ids;
  for (int b = 0; b < batch.size(); ++b) {
    const int n = batch.lengths[b];
    if (n < 1) throw ContractError("empty sentence in batch");
    if (n > cfg.max_len) throw ContractError("sentence longer than the encoder max_len");
    out.segments.push_back({static_cast<int>(ids.size()), n});
    for (int t = 0; t < n; ++t) {
      const int id = batch.token_ids[std::size_t(b) * batch.width + t];
      if (id < 0 || id >= cfg.vocab_size) throw DomainError("token id outside the vocabulary");
      ids.push_back(id);
    }
  }
  if (ids.empty()) throw ContractError("empty batch");
  const int total = static_cast<int>(ids.size());
  const int d = cfg.d_model;
  std::mt19937_64 rng(options.dropout_seed);
  const double rate = options.train ? cfg.dropout : 0.0;

  if (options.train && cfg.word_dropout > 0.0) {
    for (int &id : ids)
      if (UniformUnit(rng) < cfg.word_dropout) id = Vocabulary::kUnknown;
  }
  Var<Real> x = Scale(GatherRows(g.Param(p.embedding), ids), std::sqrt(static_cast<double>(d)));
  x = Add(x, g.Constant(Positions<Real>(out.segments, total, d)));
  x = Dropout(x, rate, rng);
  for (auto &blk : p.blocks) {
    Var<Real> a = LayerNorm(x, g.Param(blk.ln1_gain), g.Param(blk.ln1_bias));
    Var<Real> q = Linear(g, a, blk.wq, blk.bq);
    Var<Real> k = Linear(g, a, blk.wk, blk.bk);
    Var<Real> v = Linear(g, a, blk.wv, blk.bv);
    Var<Real> att = SegmentAttention(q, k, v, out.segments, cfg.heads);
    x = Add(x, Dropout(Linear(g, att, blk.wo, blk.bo), rate, rng));
    Var<Real> f = LayerNorm(x, g.Param(blk.ln2_gain), g.Param(blk.ln2_bias));
    Var<Real> h = Gelu(Linear(g, f, blk.w1, blk.b1));
    x = Add(x, Dropout(Linear(g, h, blk.w2, blk.b2), rate, rng));
  }
  out.hidden = LayerNorm(x, g.Param(p.final_gain), g.Param(p.final_bias));
  return out;
}

template <typename Real>
Var<Real> SlaLogits(Graph<Real> &g, ModelParams<Real> &p, const Var<Real> &hidden) {
  return Linear(g, hidden, p.sla_w, p.sla_b);
}

template <typename Real>
std::pair<Var<Real>, Var<Real>> SpanLogits(Graph<Real> &g, ModelParams<Real> &p,
                                           const Var<Real> &hidden) {
  return {Linear(g, hidden, p.start_w, p.start_b), Linear(g, hidden, p.end_w, p.end_b)};
}

template <typename Real>
ForwardPass<Real> Forward(Graph<Real> &g, ModelParams<Real> &p, const Batch &batch,
                          const ForwardOptions &options) {
  ForwardPass<Real> pass;
  pass.encoded = Encode(g, p, batch, options);
  pass.sla_logits = SlaLogits(g, p, pass.encoded.hidden);
  std::tie(pass.start_logits, pass.end_logits) = SpanLogits(g, p, pass.encoded.hidden);
  return pass;
}

template <typename Real>
BasicTensor<Real> PaddedHidden(const EncodedBatch<Real> &encoded, const Batch &batch) {
  const auto &h = encoded.hidden.value();
  const int d = h.cols();
  BasicTensor<Real> out({batch.size(), batch.width, d});
  for (int b = 0; b < batch.size(); ++b) {
    const Segment &s = encoded.segments[b];
    for (int t = 0; t < s.length; ++t)
      for (int j = 0; j < d; ++j)
        out[(std::size_t(b) * batch.width + t) * d + j] = h.at(s.begin + t, j);
  }
  return out;
}

namespace {

template <typename Real>
Tensor SoftmaxBlock(const BasicTensor<Real> &logits, const Segment &s) {
  const int k = logits.cols();
  Tensor out({s.length, k});
  for (int i = 0; i < s.length; ++i) {
    const Real *r = logits.data() + std::size_t(s.begin + i) * k;
    double mx = r[0];
    for (int j = 1; j < k; ++j) mx = std::max<double>(mx, r[j]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(double(r[j]) - mx);
    for (int j = 0; j < k; ++j)
      out.at(i, j) = static_cast<float>(std::exp(double(r[j]) - mx) / sum);
  }
  return out;
}

}  // namespace

template <typename Real>
std::vector<PredictionTriple> Predictions(const ForwardPass<Real> &pass) {
  std::vector<PredictionTriple> out;
  for (const Segment &s : pass.encoded.segments) {
    out.push_back({SoftmaxBlock(pass.sla_logits.value(), s),
                   SoftmaxBlock(pass.start_logits.value(), s),
                   SoftmaxBlock(pass.end_logits.value(), s)});
  }
  return out;
}

std::vector<std::vector<EntitySpan>> PredictedSpans(const std::vector<PredictionTriple> &preds) {
  std::vector<std::vector<EntitySpan>> out;
  for (const auto &p : preds) out.push_back(PairSpans(ArgmaxRows(p.start), ArgmaxRows(p.end)));
  return out;
}

template <typename Real>
std::vector<EntityRepresentation> EntityRepresentations(
    const EncodedBatch<Real> &encoded, const Batch &batch,
    const std::vector<PredictionTriple> &preds) {
  const auto &h = encoded.hidden.value();
  const int d = h.cols();
  std::vector<EntityRepresentation> out;
  auto spans = PredictedSpans(preds);
  for (std::size_t b = 0; b < spans.size(); ++b) {
    const Segment &seg = encoded.segments[b];
    for (const auto &sp : spans[b]) {
      EntityRepresentation r;
      r.cls = sp.cls;
      r.span = sp;
      r.sentence = static_cast<int>(b);
      r.language = batch.languages[b];
      r.vector.resize(2 * d);
      for (int j = 0; j < d; ++j) {
        r.vector[j] = static_cast<float>(h.at(seg.begin + sp.start, j));
        r.vector[d + j] = static_cast<float>(h.at(seg.begin + sp.end, j));
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

void ExtendVocabulary(ModelParams<float> &p, const std::vector<const Corpus *> &corpora) {
  std::vector<std::string> tokens = p.vocab.tokens();
  const std::size_t before = tokens.size();
  std::unordered_set<std::string> seen(tokens.begin(), tokens.end());
  for (const Corpus *c : corpora)
    for (const auto &s : c->sentences)
      for (const auto &t : s.tokens)
        if (seen.insert(t).second) tokens.push_back(t);
  if (tokens.size() == before) return;
  const int d = p.config.d_model;
  Tensor emb({static_cast<int>(tokens.size()), d});
  std::copy(p.embedding.value.values().begin(), p.embedding.value.values().end(), emb.storage().begin());
  for (std::size_t r = before; r < tokens.size(); ++r)
    for (int j = 0; j < d; ++j) emb.at(static_cast<int>(r), j) = p.embedding.value.at(Vocabulary::kUnknown, j);
  p.embedding = Parameter<float>(p.embedding.name, std::move(emb));
  p.vocab = Vocabulary::FromTokens(std::move(tokens));
  p.config.vocab_size = p.vocab.size();
}

std::vector<PredictionTriple> PredictBatch(ModelParams<float> &p, const Batch &batch) {
  Graph<float> g(false);
  return Predictions(Forward(g, p, batch, ForwardOptions{}));
}

#define DUALNER_INSTANTIATE(Real)                                                       \
  template struct ModelParams<Real>;                                                    \
  template ModelParams<Real> InitModel<Real>(const EncoderConfig &, const TagSet &,     \
                                             const Vocabulary &, std::uint64_t);        \
  template EncodedBatch<Real> Encode(Graph<Real> &, ModelParams<Real> &, const Batch &, \
                                     const ForwardOptions &);                           \
  template Var<Real> SlaLogits(Graph<Real> &, ModelParams<Real> &, const Var<Real> &);  \
  template std::pair<Var<Real>, Var<Real>> SpanLogits(Graph<Real> &, ModelParams<Real> &, \
                                                      const Var<Real> &);               \
  template ForwardPass<Real> Forward(Graph<Real> &, ModelParams<Real> &, const Batch &, \
                                     const ForwardOptions &);                           \
  template BasicTensor<Real> PaddedHidden(const EncodedBatch<Real> &, const Batch &);   \
  template std::vector<PredictionTriple> Predictions(const ForwardPass<Real> &);        \
  template std::vector<EntityRepresentation> EntityRepresentations(                     \
      const EncodedBatch<Real> &, const Batch &, const std::vector<PredictionTriple> &);

DUALNER_INSTANTIATE(float)
DUALNER_INSTANTIATE(double)
#undef DUALNER_INSTANTIATE

template ModelParams<double> ModelParams<float>::Cast<double>() const;
template ModelParams<float> ModelParams<double>::Cast<float>() const;

}  // namespace dualner
