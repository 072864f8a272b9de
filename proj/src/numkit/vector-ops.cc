// src/numkit/vector-ops.cc

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

#include "dlglc/numkit/vector-ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace kernels {

void LogSoftmaxRows(const Matrix &in, double temperature, Matrix *out) {
  if (!(temperature > 0.0))
    Fail(Errc::kNonPositiveTemperature, "temperature must be > 0");
  if (in.size() == 0) Fail(Errc::kEmptyInput, "softmax of empty input");
  out->resize(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    auto scaled = in.row(r) / temperature;
    double mx = scaled.maxCoeff();
    double lse = mx + std::log((scaled.array() - mx).exp().sum());
    out->row(r) = scaled.array() - lse;
  }
}

void SoftmaxRows(const Matrix &in, double temperature, Matrix *out) {
  LogSoftmaxRows(in, temperature, out);
  *out = out->array().exp().matrix();
}

}  // namespace kernels

Tensor SoftmaxTemp(const Tensor &logits, double temperature) {
  if (logits.empty()) Fail(Errc::kEmptyInput, "softmax of empty input");
  Matrix out;
  kernels::SoftmaxRows(logits.AsRow(), temperature, &out);
  return Tensor::FromRow(out.row(0));
}

Tensor LogSoftmaxTemp(const Tensor &logits, double temperature) {
  if (logits.empty()) Fail(Errc::kEmptyInput, "softmax of empty input");
  Matrix out;
  kernels::LogSoftmaxRows(logits.AsRow(), temperature, &out);
  return Tensor::FromRow(out.row(0));
}

double Dot(const Tensor &a, const Tensor &b) {
  if (a.size() != b.size()) Fail(Errc::kShapeMismatch, "dot of unequal lengths");
  return a.AsRow().dot(b.AsRow());
}

double Norm(const Tensor &v) { return v.AsRow().norm(); }

Tensor L2Normalize(const Tensor &v) {
  if (v.empty()) Fail(Errc::kEmptyInput, "normalize of empty vector");
  double n = Norm(v);
  if (!(n > 0.0)) Fail(Errc::kZeroVector, "cannot normalize a zero vector");
  RowVector out = v.AsRow() / n;
  return Tensor::FromRow(out);
}

double CosineSimilarity(const Tensor &a, const Tensor &b) {
  if (a.size() != b.size())
    Fail(Errc::kShapeMismatch, "cosine of unequal lengths");
  double na = Norm(a), nb = Norm(b);
  if (!(na > 0.0) || !(nb > 0.0))
    Fail(Errc::kZeroVector, "cosine with a zero vector");
  double c = Dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double CosineSchedule(std::int64_t step, const ScheduleSpec &spec) {
  if (spec.total_steps < 1)
    Fail(Errc::kInvalidConfig, "schedule total_steps must be >= 1");
  if (step < 0 || step > spec.total_steps)
    Fail(Errc::kStepOutOfRange, "schedule step outside [0, total_steps]");
  if (step == 0) return spec.start;
  if (step == spec.total_steps) return spec.end;
  double phase = std::numbers::pi * static_cast<double>(step) /
                 static_cast<double>(spec.total_steps);
  return spec.end + (spec.start - spec.end) * (std::cos(phase) + 1.0) / 2.0;
}

}  // namespace dlglc
