// tests/acceptance/acceptance.cc

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

// Acceptance run: one PASS/FAIL (or WARN) line per criterion. Exit status
// is nonzero when any gated criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dualner/data/synthetic.h"
#include "dualner/eval/evaluation.h"
#include "dualner/model/checkpoint.h"
#include "dualner/training/trainer.h"
#include "../common/fixtures.h"
#include "../common/oracles.h"

using namespace dualner;

namespace {

// Pinned tolerances.
constexpr double kExhaustiveSeconds = 10.0;
constexpr int kFuzzCases = 1000;
constexpr double kGradTolerance = 1e-3;
constexpr int kGradBatches = 5;
constexpr double kGradSeconds = 60.0;
constexpr int kScorerCases = 1000;
constexpr double kGainPoints = 2.0;
constexpr double kBenchmarkSeconds = 15 * 60.0;
constexpr double kLowFraction = 0.2;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

int failures = 0;

void Report(const std::string &status, const std::string &name, const std::string &detail) {
  if (status == "FAIL") ++failures;
  std::cout << status << " " << name << ": " << detail << std::endl;
}

void Gate(bool ok, const std::string &name, const std::string &detail) {
  Report(ok ? "PASS" : "FAIL", name, detail);
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Fmt(const char *fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::string List(const std::vector<double> &v, double scale = 100.0) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : "/") + Fmt("%.2f", scale * x);
  return s;
}

void LabelAlgebraExhaustive() {
  const TagSet tags = TagSet::Default();
  Timer t;
  const auto all = oracles::AllValidBio2(6, tags);
  long bad = 0;
  for (const auto &y : all) {
    const int n = static_cast<int>(y.size());
    const SpanLabelPair pair = ExtractSpanLabels(y, tags);
    if (Bio2FromSpans(SpansFromBio2(y, tags), n) != y) ++bad;
    if (Sequential(oracles::OneHot(pair.start, tags.num_span_labels()),
                   oracles::OneHot(pair.end, tags.num_span_labels())) != y)
      ++bad;
    if (ExtractSpan(oracles::OneHot(y, tags.num_sequence_labels())) != pair) ++bad;
  }
  const double s = t.seconds();
  Gate(bad == 0 && all.size() < 50000 && s < kExhaustiveSeconds, "label_algebra_exhaustive",
       std::to_string(all.size()) + " sequences, " + std::to_string(bad) + " failures, " +
           Fmt("%.2f s", s));
}

void SequentialFuzz() {
  const TagSet tags = TagSet::Default();
  std::mt19937_64 rng(2024);
  long violations = 0;
  for (int i = 0; i < kFuzzCases; ++i) {
    const int n = 1 + static_cast<int>(rng() % 32);
    const LabelSequence y = Sequential(oracles::RandomRows(n, 4, rng), oracles::RandomRows(n, 4, rng));
    violations += static_cast<long>(ValidateBio2(y, tags).size());
    if (static_cast<int>(y.size()) != n) ++violations;
  }
  Gate(violations == 0, "sequential_fuzz",
       std::to_string(kFuzzCases) + " cases, " + std::to_string(violations) + " violations");
}

void GradientSuite() {
  Timer t;
  const auto results = fixtures::RunLossGradSuite(kGradBatches, 31);
  const double s = t.seconds();
  std::map<std::string, double> worst;
  bool ok = true;
  for (const auto &r : results) {
    worst[r.loss] = std::max(worst[r.loss], r.report.max_rel_error);
    ok = ok && r.report.max_rel_error < kGradTolerance && r.report.coordinates > 0;
  }
  std::string detail;
  for (const auto &[name, e] : worst) detail += name + "=" + Fmt("%.2e", e) + " ";
  Gate(ok && s < kGradSeconds, "gradient_suite",
       detail + "on " + std::to_string(kGradBatches) + " batches, " + Fmt("%.1f s", s));
}

void ScorerOracle() {
  std::mt19937_64 rng(77);
  int mismatches = 0;
  for (int i = 0; i < kScorerCases; ++i) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const auto gold = oracles::RandomSpans(rng, n);
    const auto pred = rng() % 4 == 0 ? oracles::RandomSpans(rng, n) : oracles::PerturbSpans(gold, rng, n);
    MatchCounts b;
    oracles::BruteForceMatch(pred, gold, &b.tp, &b.fp, &b.fn);
    if (!(EntityF1(pred, gold) == b)) ++mismatches;
  }
  const MatchCounts ex = EntityF1({{0, 1, 1}, {3, 3, 2}}, {{0, 1, 1}, {3, 3, 0}});
  const bool example = ex == MatchCounts{1, 1, 1} && ex.f1() == 0.5;
  Gate(mismatches == 0 && example, "scorer_oracle",
       std::to_string(mismatches) + " mismatches in " + std::to_string(kScorerCases) +
           " cases, worked example f1=" + Fmt("%.3f", ex.f1()));
}

// Benchmark: two pseudo-languages, ~200 context words, 1000 labeled source
// and 1000 unlabeled target train sentences, 300 dev/test sentences.
SynthConfig BenchmarkSynth() {
  SynthConfig c;
  c.shared_context_rate = 0.5;
  return c;
}

struct SeedRun {
  std::map<std::string, double> target_f1;
  std::map<std::string, double> distance;
  double low_fraction_f1 = 0.0;
  std::string dualner_checkpoint;
  std::string dualner_report;
};

struct Pipeline {
  SyntheticBenchmark bench;
  Corpus pooled_test;
  explicit Pipeline(std::uint64_t seed) : bench(GenerateSynthetic(BenchmarkSynth(), seed)) {
    pooled_test = Concatenate(bench.test);
  }
  TrainConfig Config(std::uint64_t seed, double fraction) const {
    TrainConfig c;
    c.seed = seed;
    c.source_fraction = fraction;
    return c;
  }
  ModelParams<float> Stage1(std::uint64_t seed, double fraction) const {
    const Vocabulary vocab = Vocabulary::Build({&bench.source_train});
    return TrainStage1(Config(seed, fraction), bench.source_train, bench.dev, vocab, bench.tagset).model;
  }
  ModelParams<float> Stage2(const ModelParams<float> &teacher, std::uint64_t seed, double fraction,
                            Variant v) const {
    TrainConfig c = Config(seed, fraction);
    c.variant = v;
    return TrainStage2(c, teacher, bench.source_train, bench.target_train, bench.dev).model;
  }
};

SeedRun RunSeed(std::uint64_t seed, bool low_fraction) {
  const Pipeline p(seed);
  SeedRun out;
  const ModelParams<float> teacher = p.Stage1(seed, 1.0);
  for (Variant v : {Variant::kMlt, Variant::kDualNer, Variant::kSelfKl, Variant::kNoMse}) {
    ModelParams<float> m = p.Stage2(teacher, seed, 1.0, v);
    const ScoreReport r = Evaluate(m, p.bench.test[1]);
    out.target_f1[VariantName(v)] = r.f1();
    if (v == Variant::kDualNer || v == Variant::kNoMse)
      out.distance[VariantName(v)] = CrossLanguageDistance(CollectEntityRepresentations(m, p.pooled_test));
    if (v == Variant::kDualNer) {
      out.dualner_checkpoint = SerializeCheckpoint(m);
      out.dualner_report = r.Serialize();
    }
  }
  if (low_fraction) {
    ModelParams<float> m = p.Stage2(p.Stage1(seed, kLowFraction), seed, kLowFraction, Variant::kDualNer);
    out.low_fraction_f1 = Evaluate(m, p.bench.test[1]).f1();
  }
  return out;
}

void Benchmark() {
  Timer t;
  std::vector<SeedRun> runs;
  for (std::uint64_t s : kSeeds) {
    runs.push_back(RunSeed(s, true));
    const auto &r = runs.back();
    std::cout << "seed=" << s << " target_test_f1 mlt=" << Fmt("%.4f", r.target_f1.at("mlt"))
              << " dualner=" << Fmt("%.4f", r.target_f1.at("dualner"))
              << " self_kl=" << Fmt("%.4f", r.target_f1.at("self_kl"))
              << " no_mse=" << Fmt("%.4f", r.target_f1.at("no_mse"))
              << " dualner@" << kLowFraction << "=" << Fmt("%.4f", r.low_fraction_f1)
              << " distance dualner=" << Fmt("%.4f", r.distance.at("dualner"))
              << " no_mse=" << Fmt("%.4f", r.distance.at("no_mse")) << std::endl;
  }
  const double bench_seconds = t.seconds();
  auto col = [&](const std::string &v) {
    std::vector<double> x;
    for (const auto &r : runs) x.push_back(r.target_f1.at(v));
    return x;
  };
  const double mlt = Median(col("mlt")), dual = Median(col("dualner"));
  const double kl = Median(col("self_kl")), nomse = Median(col("no_mse"));
  const double gain = 100.0 * (dual - mlt);
  Gate(gain >= kGainPoints && bench_seconds < kBenchmarkSeconds, "dual_teaching_gain",
       "median target F1 dualner " + Fmt("%.2f", 100 * dual) + " vs mlt " + Fmt("%.2f", 100 * mlt) +
           " (gain " + Fmt("%.2f", gain) + " >= " + Fmt("%.1f", kGainPoints) + "), per seed dualner " +
           List(col("dualner")) + " mlt " + List(col("mlt")) + ", " + Fmt("%.0f s", bench_seconds));
  Gate(dual > kl && dual > mlt, "ablation_ordering",
       "median dualner " + Fmt("%.2f", 100 * dual) + " > self_kl " + Fmt("%.2f", 100 * kl) +
           " and > mlt " + Fmt("%.2f", 100 * mlt) + "; no_mse " + Fmt("%.2f", 100 * nomse) +
           " (reported, not gated)");

  std::vector<double> dd, dn;
  for (const auto &r : runs) {
    dd.push_back(r.distance.at("dualner"));
    dn.push_back(r.distance.at("no_mse"));
  }
  Gate(Median(dd) < Median(dn), "regularizer_distance",
       "median cross-language intra-class distance dualner " + Fmt("%.4f", Median(dd)) + " < no_mse " +
           Fmt("%.4f", Median(dn)) + ", per seed " + List(dd, 1.0) + " vs " + List(dn, 1.0));

  std::vector<double> low;
  for (const auto &r : runs) low.push_back(r.low_fraction_f1);
  const bool frac_ok = Median(low) >= mlt;
  Report(frac_ok ? "PASS" : "WARN", "source_fraction_sweep",
         "median target F1 dualner@" + Fmt("%.0f%%", 100 * kLowFraction) + " " + Fmt("%.2f", 100 * Median(low)) +
             " vs mlt@100% " + Fmt("%.2f", 100 * mlt) + " (soft)");

  // Determinism: repeat seed 1 end to end.
  const SeedRun again = RunSeed(kSeeds.front(), false);
  const bool same_ckpt = again.dualner_checkpoint == runs.front().dualner_checkpoint;
  const bool same_report = again.dualner_report == runs.front().dualner_report &&
                           again.target_f1 == runs.front().target_f1;
  Gate(same_ckpt && same_report, "determinism",
       std::string("checkpoints ") + (same_ckpt ? "bit-identical" : "differ") + ", score reports " +
           (same_report ? "identical" : "differ"));
}

}  // namespace

int main() {
  try {
    LabelAlgebraExhaustive();
    SequentialFuzz();
    GradientSuite();
    ScorerOracle();
    Benchmark();
  } catch (const std::exception &e) {
    std::cout << "FAIL acceptance: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "acceptance: all gated criteria passed" : "acceptance: failures=" + std::to_string(failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
