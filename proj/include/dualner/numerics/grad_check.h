// dualner/numerics/grad_check.h

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

#ifndef DUALNER_NUMERICS_GRAD_CHECK_H_
#define DUALNER_NUMERICS_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dualner/numerics/autodiff.h"

namespace dualner {

struct GradCheckReport {
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t coordinates = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed() const { return max_rel_error < tolerance; }
};

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  /// Coordinates sampled per parameter tensor; tensors smaller than this
  /// are checked exhaustively.
  std::size_t samples_per_param = 12;
  /// Both gradients below this magnitude count as agreeing (the ratio of
  /// two roundoff-level numbers carries no information).
  double negligible = 1e-7;
  std::uint64_t seed = 7;
};

/// Central finite differences against reverse-mode gradients. `loss_fn`
/// must build a fresh graph-local loss and be deterministic. Parameter
/// gradient accumulators are left zeroed on return. Never throws on a
/// mismatch; inspect the report.
template <typename Real>
GradCheckReport GradCheck(const std::function<Var<Real>(Graph<Real> &)> &loss_fn,
                          const std::vector<Parameter<Real> *> &params,
                          const GradCheckOptions &options = {});

}  // namespace dualner

#endif  // DUALNER_NUMERICS_GRAD_CHECK_H_
