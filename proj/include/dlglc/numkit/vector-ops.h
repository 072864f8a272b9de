// include/dlglc/numkit/vector-ops.h

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

#ifndef DLGLC_NUMKIT_VECTOR_OPS_H_
#define DLGLC_NUMKIT_VECTOR_OPS_H_

#include <cstdint>

#include "dlglc/numkit/tensor.h"

namespace dlglc {

// softmax(logits / temperature), computed with the max-shift trick.
Tensor SoftmaxTemp(const Tensor &logits, double temperature);
// log of SoftmaxTemp, without forming the probabilities first.
Tensor LogSoftmaxTemp(const Tensor &logits, double temperature);

Tensor L2Normalize(const Tensor &v);
double Dot(const Tensor &a, const Tensor &b);
double Norm(const Tensor &v);
double CosineSimilarity(const Tensor &a, const Tensor &b);

struct ScheduleSpec {
  double start = 0.0;
  double end = 0.0;
  std::int64_t total_steps = 1;
};

// end + (start - end) * (cos(pi * step / total) + 1) / 2, for step in [0, total].
double CosineSchedule(std::int64_t step, const ScheduleSpec &spec);

// Row-wise kernels shared by the public functions above and the tape.
namespace kernels {
void SoftmaxRows(const Matrix &in, double temperature, Matrix *out);
void LogSoftmaxRows(const Matrix &in, double temperature, Matrix *out);
}  // namespace kernels

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_VECTOR_OPS_H_
