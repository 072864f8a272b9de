// src/numkit/sgd.cc

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

#include "dlglc/numkit/sgd.h"

#include "dlglc/numkit/error.h"

namespace dlglc {

void Sgd::Step(std::span<Param> params, double lr) {
  if (velocity_.empty()) {
    for (const Param &p : params) velocity_.emplace_back(p.value.shape());
  }
  if (velocity_.size() != params.size())
    Fail(Errc::kShapeMismatch, "optimizer bound to a different parameter set");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param &p = params[i];
    auto v = velocity_[i].AsMatrix();
    auto w = p.value.AsMatrix();
    v = opts_.momentum * v + p.grad.AsMatrix() + opts_.weight_decay * w;
    if (lr != 0.0) w -= lr * v;
  }
}

}  // namespace dlglc
