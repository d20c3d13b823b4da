// tools/dualner.cc

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

// Command-line driver.  Subcommands:
//   synth, convert, train1, train2, predict, score, dump-repr
// Every run prints its resolved settings as key=value lines on stdout.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualner/data/corpus.h"
#include "dualner/data/synthetic.h"
#include "dualner/eval/evaluation.h"
#include "dualner/model/checkpoint.h"
#include "dualner/training/trainer.h"
#include "dualner/util/error.h"
#include "dualner/util/key_value.h"

namespace dualner {
namespace {

void Echo(const std::string &command, const KeyValues &kv) {
  std::cout << "command=" << command << "\n" << kv.Serialize();
  std::cout.flush();
}

std::vector<Corpus> ParseAll(const std::vector<std::string> &paths, const TagSet &tagset,
                             const std::string &lang) {
  std::vector<Corpus> out;
  for (const auto &p : paths) out.push_back(ParseColumnFile(p, tagset, lang));
  return out;
}

// Config file keys, then named flags on top.
struct TrainFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void Register(CLI::App *app) {
    app->add_option("--config", config_path, "key=value training config file");
    const KeyValues defaults = TrainConfig().ToKeyValues();
    for (const auto &[key, value] : defaults.values()) {
      std::string flag = "--" + key;
      for (auto &ch : flag)
        if (ch == '_') ch = '-';
      if (key == "stage") continue;
      app->add_option(flag, values[key], "overrides " + key + " (default " + value + ")");
    }
  }

  TrainConfig Resolve(int stage) const {
    KeyValues kv = config_path.empty() ? KeyValues() : KeyValues::ReadFile(config_path);
    for (const auto &[k, v] : values)
      if (!v.empty()) kv.Set(k, v);
    kv.Set("stage", std::to_string(stage));
    return TrainConfig::FromKeyValues(kv);
  }
};

TagSet ParseTags(const std::string &tags) { return TagSet(SplitList(tags, ',')); }

int RunSynth(const std::string &config_path, const std::vector<std::string> &sets,
             std::uint64_t seed, const std::string &out_dir) {
  KeyValues kv = config_path.empty() ? KeyValues() : KeyValues::ReadFile(config_path);
  for (const auto &s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv.Set(s.substr(0, eq), s.substr(eq + 1));
  }
  const SynthConfig cfg = SynthConfig::FromKeyValues(kv);
  KeyValues resolved = cfg.ToKeyValues();
  resolved.Set("seed", std::to_string(seed));
  resolved.Set("out", out_dir);
  Echo("synth", resolved);
  const SyntheticBenchmark b = GenerateSynthetic(cfg, seed);
  std::filesystem::create_directories(out_dir);
  const std::string dir = out_dir + "/";
  WriteColumnFile(b.source_train, b.tagset, dir + b.languages[0] + ".train.txt");
  for (std::size_t l = 1; l < b.languages.size(); ++l)
    WriteColumnFile(b.target_train[l - 1], b.tagset, dir + b.languages[l] + ".train.txt");
  for (std::size_t l = 0; l < b.languages.size(); ++l) {
    WriteColumnFile(b.dev[l], b.tagset, dir + b.languages[l] + ".dev.txt");
    WriteColumnFile(b.test[l], b.tagset, dir + b.languages[l] + ".test.txt");
  }
  std::ofstream conf(dir + "synth.conf");
  conf << cfg.ToKeyValues().Serialize();
  if (!conf) throw IoError("cannot write " + dir + "synth.conf");
  return 0;
}

int RunConvert(const std::string &to, const std::string &in, const std::string &out,
               const TagSet &tagset, const std::string &lang) {
  KeyValues kv;
  kv.Set("to", to);
  kv.Set("in", in);
  kv.Set("out", out);
  kv.Set("tags", JoinList(tagset.classes()));
  Echo("convert", kv);
  if (to == "spans") {
    WriteSpanColumnFile(ParseColumnFile(in, tagset, lang), tagset, out);
  } else if (to == "bio2") {
    WriteColumnFile(ParseSpanColumnFile(in, tagset, lang), tagset, out);
  } else {
    throw ConfigError("--to must be spans or bio2");
  }
  return 0;
}

void PrintSummary(const TrainResult &r) {
  std::cout << "best_dev_f1=" << FormatDouble(r.best_dev_f1) << "\nsteps=" << r.steps << "\n";
}

int RunTrain1(const TrainFlags &flags, const std::string &train, const std::vector<std::string> &dev,
              const std::string &out, const TagSet &tagset,
              const std::string &lang, const std::string &log_path) {
  const TrainConfig cfg = flags.Resolve(1);
  KeyValues kv = cfg.ToKeyValues();
  kv.Set("train", train);
  kv.Set("dev", JoinList(dev));
  kv.Set("out", out);
  Echo("train1", kv);
  const Corpus src = ParseColumnFile(train, tagset, lang);
  const auto devs = ParseAll(dev, tagset, lang);
  // Target tokens join in Stage 2.
  const Vocabulary vocab = Vocabulary::Build({&src});
  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw IoError("cannot open " + log_path);
  }
  const TrainResult r = TrainStage1(cfg, src, devs, vocab, tagset, log_path.empty() ? nullptr : &log_file);
  SaveCheckpoint(r.model, out);
  PrintSummary(r);
  return 0;
}

int RunTrain2(const TrainFlags &flags, const std::string &init, const std::string &train,
              const std::vector<std::string> &target, const std::vector<std::string> &dev,
              const std::string &out, const std::string &lang, const std::string &log_path) {
  const TrainConfig cfg = flags.Resolve(2);
  KeyValues kv = cfg.ToKeyValues();
  kv.Set("init", init);
  kv.Set("train", train);
  kv.Set("target_train", JoinList(target));
  kv.Set("dev", JoinList(dev));
  kv.Set("out", out);
  Echo("train2", kv);
  if (cfg.variant == Variant::kMlt) {
    // Stage 2 is skipped: the output is the input checkpoint, unchanged.
    const ModelParams<float> teacher = LoadCheckpoint(init);
    SaveCheckpoint(teacher, out);
    std::cout << "steps=0\n";
    return 0;
  }
  const ModelParams<float> teacher = LoadCheckpoint(init);
  const Corpus src = ParseColumnFile(train, teacher.tagset, lang);
  const auto trg = ParseAll(target, teacher.tagset, lang);
  const auto devs = ParseAll(dev, teacher.tagset, lang);
  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw IoError("cannot open " + log_path);
  }
  const TrainResult r =
      TrainStage2(cfg, teacher, src, trg, devs, log_path.empty() ? nullptr : &log_file);
  SaveCheckpoint(r.model, out);
  PrintSummary(r);
  return 0;
}

int RunPredict(const std::string &model, const std::string &in, const std::string &out,
               const std::string &lang) {
  KeyValues kv;
  kv.Set("model", model);
  kv.Set("in", in);
  kv.Set("out", out);
  Echo("predict", kv);
  ModelParams<float> params = LoadCheckpoint(model);
  const Corpus corpus = ParseColumnFile(in, params.tagset, lang);
  WriteColumnFile(Predict(params, corpus), params.tagset, out);
  return 0;
}

int RunScore(const std::string &pred, const std::string &gold, const TagSet &tagset,
             const std::string &lang) {
  KeyValues kv;
  kv.Set("pred", pred);
  kv.Set("gold", gold);
  kv.Set("tags", JoinList(tagset.classes()));
  Echo("score", kv);
  const Corpus p = ParseColumnFile(pred, tagset, lang);
  const Corpus g = ParseColumnFile(gold, tagset, lang);
  if (p.size() != g.size()) throw ContractError("prediction and gold sentence counts differ");
  std::vector<std::vector<EntitySpan>> spans;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p.sentences[i].labels) throw ContractError("prediction file has unlabeled sentences");
    if (p.sentences[i].tokens.size() != g.sentences[i].tokens.size())
      throw ContractError("sentence " + std::to_string(i) + " differs in length");
    spans.push_back(SpansFromBio2(*p.sentences[i].labels, tagset, true));
  }
  std::cout << ScoreSpans(spans, g, tagset).Serialize();
  return 0;
}

int RunDump(const std::string &model, const std::vector<std::string> &in, const std::string &out,
            const std::string &lang) {
  KeyValues kv;
  kv.Set("model", model);
  kv.Set("in", JoinList(in));
  kv.Set("out", out);
  Echo("dump-repr", kv);
  ModelParams<float> params = LoadCheckpoint(model);
  const Corpus corpus = Concatenate(ParseAll(in, params.tagset, lang));
  DumpEntityRepresentations(params, corpus, out);
  return 0;
}

int Main(int argc, char **argv) {
  CLI::App app{"Dual-teaching cross-lingual NER"};
  app.require_subcommand(1);
  std::string lang = "und";
  std::string tags = "LOC,PER,ORG";

  auto *synth = app.add_subcommand("synth", "generate the synthetic benchmark");
  std::string synth_config, out_dir;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;
  synth->add_option("--config", synth_config, "key=value generator config");
  synth->add_option("--set", sets, "key=value override (repeatable)");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", out_dir, "output directory")->required();

  auto *convert = app.add_subcommand("convert", "BIO2 <-> start/end column files");
  std::string to, in, out;
  convert->add_option("--to", to, "spans | bio2")->required();
  convert->add_option("--in", in)->required()->check(CLI::ExistingFile);
  convert->add_option("--out", out)->required();
  convert->add_option("--tags", tags, "comma-separated entity classes");
  convert->add_option("--lang", lang, "language of sentences without a header");

  auto *train1 = app.add_subcommand("train1", "Stage 1: multitask training on labeled source");
  TrainFlags flags1;
  flags1.Register(train1);
  std::string train, log_path;
  std::vector<std::string> target, dev;
  train1->add_option("--train", train, "labeled source train file")->required()->check(CLI::ExistingFile);
  train1->add_option("--dev", dev, "labeled dev files, all languages")->required()->check(CLI::ExistingFile);
  train1->add_option("--out", out, "checkpoint path")->required();
  train1->add_option("--tags", tags, "comma-separated entity classes");
  train1->add_option("--lang", lang, "language of sentences without a header");
  train1->add_option("--log", log_path, "training log path");

  auto *train2 = app.add_subcommand("train2", "Stage 2: dual teaching");
  TrainFlags flags2;
  flags2.Register(train2);
  std::string init;
  train2->add_option("--init", init, "Stage-1 checkpoint")->required()->check(CLI::ExistingFile);
  train2->add_option("--train", train, "labeled source train file")->required()->check(CLI::ExistingFile);
  train2->add_option("--target-train", target, "unlabeled target files")->check(CLI::ExistingFile);
  train2->add_option("--dev", dev, "labeled dev files, all languages")->required()->check(CLI::ExistingFile);
  train2->add_option("--out", out, "checkpoint path")->required();
  train2->add_option("--lang", lang, "language of sentences without a header");
  train2->add_option("--log", log_path, "training log path");

  auto *predict = app.add_subcommand("predict", "decode a column file with the span heads");
  std::string model;
  predict->add_option("--model", model)->required()->check(CLI::ExistingFile);
  predict->add_option("--in", in)->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out)->required();
  predict->add_option("--lang", lang, "language of sentences without a header");

  auto *score = app.add_subcommand("score", "entity-level F1 of predictions against gold");
  std::string pred, gold;
  score->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
  score->add_option("--gold", gold)->required()->check(CLI::ExistingFile);
  score->add_option("--tags", tags, "comma-separated entity classes");
  score->add_option("--lang", lang, "language of sentences without a header");

  auto *dump = app.add_subcommand("dump-repr", "export entity representations");
  std::vector<std::string> inputs;
  dump->add_option("--model", model)->required()->check(CLI::ExistingFile);
  dump->add_option("--in", inputs, "column files")->required()->check(CLI::ExistingFile);
  dump->add_option("--out", out)->required();
  dump->add_option("--lang", lang, "language of sentences without a header");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*synth) return RunSynth(synth_config, sets, seed, out_dir);
    if (*convert) return RunConvert(to, in, out, ParseTags(tags), lang);
    if (*train1) return RunTrain1(flags1, train, dev, out, ParseTags(tags), lang, log_path);
    if (*train2) return RunTrain2(flags2, init, train, target, dev, out, lang, log_path);
    if (*predict) return RunPredict(model, in, out, lang);
    if (*score) return RunScore(pred, gold, ParseTags(tags), lang);
    if (*dump) return RunDump(model, inputs, out, lang);
  } catch (const Error &e) {
    std::cerr << "dualner: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "dualner: unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace
}  // namespace dualner

int main(int argc, char **argv) { return dualner::Main(argc, argv); }
