// numerics/grad_check.cc

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

#include "dualner/numerics/grad_check.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace dualner {

namespace {

template <typename Real>
double Evaluate(const std::function<Var<Real>(Graph<Real> &)> &loss_fn) {
  Graph<Real> g(false);
  return static_cast<double>(loss_fn(g).scalar());
}

}  // namespace

template <typename Real>
GradCheckReport GradCheck(const std::function<Var<Real>(Graph<Real> &)> &loss_fn,
                          const std::vector<Parameter<Real> *> &params,
                          const GradCheckOptions &options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  for (auto *p : params) p->ZeroGrad();
  {
    Graph<Real> g(true);
    Var<Real> loss = loss_fn(g);
    g.Backward(loss);
  }
  std::mt19937_64 rng(options.seed);
  for (auto *p : params) {
    const std::size_t n = p->value.size();
    std::vector<std::size_t> coords;
    if (n <= options.samples_per_param) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (std::size_t i = 0; i < options.samples_per_param; ++i)
        coords.push_back(static_cast<std::size_t>(rng() % n));
    }
    for (std::size_t c : coords) {
      const Real saved = p->value[c];
      p->value[c] = static_cast<Real>(saved + options.step);
      const double plus = Evaluate(loss_fn);
      p->value[c] = static_cast<Real>(saved - options.step);
      const double minus = Evaluate(loss_fn);
      p->value[c] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double analytic = p->grad[c];
      const double scale = std::max(std::abs(numeric), std::abs(analytic));
      const double rel =
          scale < options.negligible ? 0.0 : std::abs(numeric - analytic) / scale;
      ++report.coordinates;
      if (rel > report.max_rel_error || report.worst_param.empty()) {
        if (rel >= report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = p->name;
          report.worst_index = c;
          report.worst_analytic = analytic;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  for (auto *p : params) p->ZeroGrad();
  return report;
}

template GradCheckReport GradCheck<float>(const std::function<Var<float>(Graph<float> &)> &,
                                          const std::vector<Parameter<float> *> &,
                                          const GradCheckOptions &);
template GradCheckReport GradCheck<double>(
    const std::function<Var<double>(Graph<double> &)> &,
    const std::vector<Parameter<double> *> &, const GradCheckOptions &);

}  // namespace dualner
