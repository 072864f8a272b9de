// include/dlglc/numkit/grad-check.h

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

#ifndef DLGLC_NUMKIT_GRAD_CHECK_H_
#define DLGLC_NUMKIT_GRAD_CHECK_H_

#include <functional>
#include <span>

#include "dlglc/numkit/autodiff.h"

namespace dlglc {

// Builds a scalar loss on the tape from leaves bound to the given params
// (one Var per param, in order).
using LossBuilder =
    std::function<ad::Var(ad::Tape &, std::span<const ad::Var>)>;

// Max over every coordinate of |analytic - central difference| /
// max(1, |analytic|). Param values are restored before returning; their
// grads hold the analytic gradient.
double GradCheck(const LossBuilder &loss, std::span<Param> point,
                 double epsilon);

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_GRAD_CHECK_H_
