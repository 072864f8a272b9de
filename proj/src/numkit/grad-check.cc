// src/numkit/grad-check.cc

// Copyright 2026  dlglc authors

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

#include "dlglc/numkit/grad-check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace {

double Evaluate(const LossBuilder &loss, std::span<Param> point) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(point.size());
  for (Param &p : point) leaves.push_back(tape.Leaf(p));
  double v = tape.scalar(loss(tape, leaves));
  if (!std::isfinite(v)) Fail(Errc::kNonFiniteLoss, "loss is not finite");
  return v;
}

}  // namespace

double GradCheck(const LossBuilder &loss, std::span<Param> point,
                 double epsilon) {
  if (!(epsilon > 1e-8 && epsilon < 1e-2))
    Fail(Errc::kInvalidConfig, "grad check epsilon must lie in (1e-8, 1e-2)");
  for (Param &p : point) p.ZeroGrad();
  {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (Param &p : point) leaves.push_back(tape.Leaf(p));
    ad::Var out = loss(tape, leaves);
    tape.Backward(out);
  }
  double worst = 0.0;
  for (Param &p : point) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + epsilon;
      double up = Evaluate(loss, point);
      p.value[i] = saved - epsilon;
      double down = Evaluate(loss, point);
      p.value[i] = saved;
      double numeric = (up - down) / (2.0 * epsilon);
      double analytic = p.grad[i];
      double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace dlglc
