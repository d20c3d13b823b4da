// data/synthetic.cc

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

#include "dualner/data/synthetic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "dualner/data/batching.h"
#include "dualner/numerics/autodiff.h"
#include "dualner/util/error.h"

namespace dualner {

namespace {

std::string Lower(std::string s) {
  for (auto &ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::uint64_t Stream(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int UniformInt(std::mt19937_64 &rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

int SampleCdf(const std::vector<double> &cdf, std::mt19937_64 &rng) {
  const double u = UniformUnit(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
}

struct Block {
  bool mention = false;
  int word = 0;  // context word when !mention
  int cls = 0;
  int id = 0;
  int trigger = -1;  // trigger index or -1
};

using Skeleton = std::vector<Block>;

}  // namespace

void SynthConfig::Validate() const {
  if (languages.size() < 2) throw ConfigError("synthetic benchmark needs at least 2 languages");
  for (std::size_t i = 0; i < languages.size(); ++i) {
    const auto &l = languages[i];
    if (l.empty() || l.find_first_of(" \t_") != std::string::npos)
      throw ConfigError("language codes must be non-empty without spaces or '_'");
    for (std::size_t j = 0; j < i; ++j)
      if (languages[j] == l) throw ConfigError("duplicate language " + l);
  }
  TagSet check(classes);
  if (!class_weights.empty()) {
    if (class_weights.size() != classes.size())
      throw ConfigError("class_weights needs one weight per class");
    double s = 0;
    for (double w : class_weights) {
      if (!(w >= 0)) throw ConfigError("class weights must be non-negative");
      s += w;
    }
    if (s <= 0) throw ConfigError("class weights sum to zero");
  }
  if (context_vocab < 1 || entities_per_class < 1 || max_entity_len < 1 || triggers_per_class < 1)
    throw ConfigError("lexicon sizes must be positive");
  if (min_len < 1 || min_len > max_len) throw ConfigError("need 1 <= min_len <= max_len");
  if (max_len > max_seq_len) throw ConfigError("max_len exceeds max_seq_len");
  if (max_entity_len + 1 > max_len)
    throw ConfigError("entity (with trigger) longer than the maximum sentence length");
  auto unit = [](double v, const char *name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0,1]");
  };
  unit(entity_rate, "entity_rate");
  unit(trigger_rate, "trigger_rate");
  unit(shared_entity_rate, "shared_entity_rate");
  unit(shared_context_rate, "shared_context_rate");
  unit(shared_trigger_rate, "shared_trigger_rate");
  if (zipf_exponent < 0) throw ConfigError("zipf_exponent must be non-negative");
  if (source_train < 1 || target_train < 0 || dev < 0 || test < 0)
    throw ConfigError("split sizes must be non-negative (source_train positive)");
}

SynthConfig SynthConfig::FromKeyValues(const KeyValues &kv) {
  kv.RejectUnknown({"languages", "classes", "class_weights", "context_vocab",
                    "entities_per_class", "max_entity_len", "triggers_per_class", "min_len",
                    "max_len", "max_seq_len", "entity_rate", "trigger_rate",
                    "shared_entity_rate", "shared_context_rate", "shared_trigger_rate",
                    "zipf_exponent", "source_train", "target_train", "dev", "test"});
  SynthConfig c;
  if (kv.Has("languages")) c.languages = SplitList(kv.GetString("languages", ""));
  if (kv.Has("classes")) c.classes = SplitList(kv.GetString("classes", ""));
  if (kv.Has("class_weights")) {
    c.class_weights.clear();
    for (const auto &w : SplitList(kv.GetString("class_weights", ""))) {
      KeyValues one;
      one.Set("w", w);
      c.class_weights.push_back(one.GetDouble("w", 0));
    }
  }
  c.context_vocab = static_cast<int>(kv.GetInt("context_vocab", c.context_vocab));
  c.entities_per_class = static_cast<int>(kv.GetInt("entities_per_class", c.entities_per_class));
  c.max_entity_len = static_cast<int>(kv.GetInt("max_entity_len", c.max_entity_len));
  c.triggers_per_class = static_cast<int>(kv.GetInt("triggers_per_class", c.triggers_per_class));
  c.min_len = static_cast<int>(kv.GetInt("min_len", c.min_len));
  c.max_len = static_cast<int>(kv.GetInt("max_len", c.max_len));
  c.max_seq_len = static_cast<int>(kv.GetInt("max_seq_len", c.max_seq_len));
  c.entity_rate = kv.GetDouble("entity_rate", c.entity_rate);
  c.trigger_rate = kv.GetDouble("trigger_rate", c.trigger_rate);
  c.shared_entity_rate = kv.GetDouble("shared_entity_rate", c.shared_entity_rate);
  c.shared_context_rate = kv.GetDouble("shared_context_rate", c.shared_context_rate);
  c.shared_trigger_rate = kv.GetDouble("shared_trigger_rate", c.shared_trigger_rate);
  c.zipf_exponent = kv.GetDouble("zipf_exponent", c.zipf_exponent);
  c.source_train = static_cast<int>(kv.GetInt("source_train", c.source_train));
  c.target_train = static_cast<int>(kv.GetInt("target_train", c.target_train));
  c.dev = static_cast<int>(kv.GetInt("dev", c.dev));
  c.test = static_cast<int>(kv.GetInt("test", c.test));
  c.Validate();
  return c;
}

KeyValues SynthConfig::ToKeyValues() const {
  KeyValues kv;
  kv.Set("languages", JoinList(languages));
  kv.Set("classes", JoinList(classes));
  std::vector<std::string> w;
  for (double x : class_weights) w.push_back(FormatDouble(x));
  kv.Set("class_weights", JoinList(w));
  kv.Set("context_vocab", std::to_string(context_vocab));
  kv.Set("entities_per_class", std::to_string(entities_per_class));
  kv.Set("max_entity_len", std::to_string(max_entity_len));
  kv.Set("triggers_per_class", std::to_string(triggers_per_class));
  kv.Set("min_len", std::to_string(min_len));
  kv.Set("max_len", std::to_string(max_len));
  kv.Set("max_seq_len", std::to_string(max_seq_len));
  kv.Set("entity_rate", FormatDouble(entity_rate));
  kv.Set("trigger_rate", FormatDouble(trigger_rate));
  kv.Set("shared_entity_rate", FormatDouble(shared_entity_rate));
  kv.Set("shared_context_rate", FormatDouble(shared_context_rate));
  kv.Set("shared_trigger_rate", FormatDouble(shared_trigger_rate));
  kv.Set("zipf_exponent", FormatDouble(zipf_exponent));
  kv.Set("source_train", std::to_string(source_train));
  kv.Set("target_train", std::to_string(target_train));
  kv.Set("dev", std::to_string(dev));
  kv.Set("test", std::to_string(test));
  return kv;
}

SyntheticLexicon::SyntheticLexicon(const SynthConfig &config, std::uint64_t seed)
    : config_(config) {
  config_.Validate();
  std::mt19937_64 rng(Stream(seed, 0));
  const int num_classes = static_cast<int>(config_.classes.size());
  entities_.resize(num_classes);
  entity_shared_.resize(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const std::string stem = Lower(config_.classes[c]);
    for (int id = 0; id < config_.entities_per_class; ++id) {
      const int len = UniformInt(rng, 1, config_.max_entity_len);
      const bool shared = UniformUnit(rng) < config_.shared_entity_rate;
      std::vector<std::string> toks;
      for (int t = 0; t < len; ++t) {
        toks.push_back(stem + std::to_string(id) + "." + std::to_string(t));
        base_shared_[toks.back()] = shared;
      }
      entities_[c].push_back(std::move(toks));
      entity_shared_[c].push_back(shared);
    }
    for (int k = 0; k < config_.triggers_per_class; ++k)
      base_shared_[TriggerBase(c, k)] = UniformUnit(rng) < config_.shared_trigger_rate;
  }
  for (int w = 0; w < config_.context_vocab; ++w)
    base_shared_[ContextBase(w)] = UniformUnit(rng) < config_.shared_context_rate;
}

int SyntheticLexicon::num_entities(int cls) const {
  return static_cast<int>(entities_.at(cls).size());
}
const std::vector<std::string> &SyntheticLexicon::EntityBase(int cls, int id) const {
  return entities_.at(cls).at(id);
}
bool SyntheticLexicon::EntityShared(int cls, int id) const { return entity_shared_.at(cls).at(id); }
std::string SyntheticLexicon::ContextBase(int word) const { return "w" + std::to_string(word); }
std::string SyntheticLexicon::TriggerBase(int cls, int k) const {
  return "t" + Lower(config_.classes.at(cls)) + std::to_string(k);
}

bool SyntheticLexicon::IsShared(const std::string &base) const {
  auto it = base_shared_.find(base);
  if (it == base_shared_.end()) throw DomainError("token not in the synthetic lexicon: " + base);
  return it->second;
}

std::string SyntheticLexicon::Surface(const std::string &base, const std::string &language) const {
  return IsShared(base) ? base : language + "_" + base;
}

std::string SyntheticLexicon::Base(const std::string &surface, const std::string &language) const {
  const std::string prefix = language + "_";
  if (surface.compare(0, prefix.size(), prefix) == 0) {
    std::string base = surface.substr(prefix.size());
    auto it = base_shared_.find(base);
    if (it != base_shared_.end() && !it->second) return base;
  }
  auto it = base_shared_.find(surface);
  if (it != base_shared_.end() && it->second) return surface;
  throw DomainError("'" + surface + "' is not a " + language + " surface form");
}

std::vector<std::string> SyntheticLexicon::EntitySurface(int cls, int id,
                                                         const std::string &language) const {
  std::vector<std::string> out;
  for (const auto &b : EntityBase(cls, id)) out.push_back(Surface(b, language));
  return out;
}

namespace {

class SkeletonSampler {
 public:
  SkeletonSampler(const SyntheticLexicon &lex) : lex_(lex), cfg_(lex.config()) {
    for (int w = 0; w < cfg_.context_vocab; ++w) {
      const double p = 1.0 / std::pow(double(w + 1), cfg_.zipf_exponent);
      word_cdf_.push_back((word_cdf_.empty() ? 0.0 : word_cdf_.back()) + p);
    }
    const std::size_t nc = cfg_.classes.size();
    for (std::size_t c = 0; c < nc; ++c) {
      const double w = cfg_.class_weights.empty() ? 1.0 : cfg_.class_weights[c];
      class_cdf_.push_back((class_cdf_.empty() ? 0.0 : class_cdf_.back()) + w);
    }
  }

  Skeleton Sample(std::mt19937_64 &rng) const {
    const int n = UniformInt(rng, cfg_.min_len, cfg_.max_len);
    int k = 0;
    for (int i = 0; i < n; ++i) k += UniformUnit(rng) < cfg_.entity_rate ? 1 : 0;
    std::vector<Block> mentions;
    int used = 0;
    for (int m = 0; m < k; ++m) {
      Block b;
      b.mention = true;
      b.cls = SampleCdf(class_cdf_, rng);
      b.id = static_cast<int>(rng() % static_cast<std::uint64_t>(lex_.num_entities(b.cls)));
      if (UniformUnit(rng) < cfg_.trigger_rate)
        b.trigger = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg_.triggers_per_class));
      const int width = static_cast<int>(lex_.EntityBase(b.cls, b.id).size()) + (b.trigger >= 0);
      if (used + width > n) continue;  // does not fit
      used += width;
      mentions.push_back(b);
    }
    Skeleton s = mentions;
    for (int i = used; i < n; ++i) {
      Block w;
      w.word = SampleCdf(word_cdf_, rng);
      s.push_back(w);
    }
    std::vector<std::size_t> order(s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    DeterministicShuffle(order, rng);
    Skeleton out;
    for (std::size_t i : order) out.push_back(s[i]);
    return out;
  }

  Sentence Render(const Skeleton &sk, const std::string &language) const {
    Sentence s;
    s.language = language;
    s.labels.emplace();
    for (const Block &b : sk) {
      if (!b.mention) {
        s.tokens.push_back(lex_.Surface(lex_.ContextBase(b.word), language));
        s.labels->push_back(kOutside);
        continue;
      }
      if (b.trigger >= 0) {
        s.tokens.push_back(lex_.Surface(lex_.TriggerBase(b.cls, b.trigger), language));
        s.labels->push_back(kOutside);
      }
      auto toks = lex_.EntitySurface(b.cls, b.id, language);
      for (std::size_t t = 0; t < toks.size(); ++t) {
        s.tokens.push_back(toks[t]);
        s.labels->push_back(t == 0 ? BeginLabel(b.cls) : InsideLabel(b.cls));
      }
    }
    return s;
  }

 private:
  const SyntheticLexicon &lex_;
  const SynthConfig &cfg_;
  std::vector<double> word_cdf_;
  std::vector<double> class_cdf_;
};

Corpus MakeCorpus(Split split, Role role) {
  Corpus c;
  c.split = split;
  c.role = role;
  return c;
}

}  // namespace

SyntheticBenchmark GenerateSynthetic(const SynthConfig &config, std::uint64_t seed) {
  config.Validate();
  SyntheticLexicon lex(config, seed);
  SkeletonSampler sampler(lex);
  SyntheticBenchmark out;
  out.tagset = TagSet(config.classes);
  out.languages = config.languages;
  const std::string &src = config.languages.front();

  std::mt19937_64 rng(Stream(seed, 1));
  out.source_train = MakeCorpus(Split::kTrain, Role::kSourceLabeled);
  for (int i = 0; i < config.source_train; ++i)
    out.source_train.sentences.push_back(sampler.Render(sampler.Sample(rng), src));

  for (std::size_t l = 1; l < config.languages.size(); ++l) {
    std::mt19937_64 trng(Stream(seed, 10 + l));
    Corpus c = MakeCorpus(Split::kTrain, Role::kTargetUnlabeled);
    for (int i = 0; i < config.target_train; ++i) {
      Sentence s = sampler.Render(sampler.Sample(trng), config.languages[l]);
      s.labels.reset();
      c.sentences.push_back(std::move(s));
    }
    out.target_train.push_back(std::move(c));
  }

  auto parallel = [&](Split split, int count, std::uint64_t stream) {
    std::mt19937_64 prng(Stream(seed, stream));
    std::vector<Skeleton> skeletons;
    for (int i = 0; i < count; ++i) skeletons.push_back(sampler.Sample(prng));
    std::vector<Corpus> per_lang;
    for (const auto &lang : config.languages) {
      Corpus c = MakeCorpus(split, Role::kSourceLabeled);
      for (const auto &sk : skeletons) c.sentences.push_back(sampler.Render(sk, lang));
      per_lang.push_back(std::move(c));
    }
    return per_lang;
  };
  out.dev = parallel(Split::kDev, config.dev, 2);
  out.test = parallel(Split::kTest, config.test, 3);
  return out;
}

}  // namespace dualner
