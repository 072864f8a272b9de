// include/dlglc/numkit/sgd.h

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

#ifndef DLGLC_NUMKIT_SGD_H_
#define DLGLC_NUMKIT_SGD_H_

#include <span>
#include <vector>

#include "dlglc/numkit/tensor.h"

namespace dlglc {

struct SgdOptions {
  double momentum = 0.9;
  double weight_decay = 5e-5;
};

// SGD with heavy-ball momentum and L2 weight decay:
//   v <- momentum * v + grad + weight_decay * w;  w <- w - lr * v.
class Sgd {
 public:
  explicit Sgd(SgdOptions opts = {}) : opts_(opts) {}

  void Step(std::span<Param> params, double lr);
  void Reset() { velocity_.clear(); }

 private:
  SgdOptions opts_;
  std::vector<Tensor> velocity_;
};

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_SGD_H_
