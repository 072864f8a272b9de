// src/numkit/tensor.cc

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

#include "dlglc/numkit/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "dlglc/numkit/error.h"

namespace dlglc {

std::string_view ErrcName(Errc code) {
  switch (code) {
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kNonPositiveTemperature: return "NonPositiveTemperature";
    case Errc::kZeroVector: return "ZeroVector";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kStepOutOfRange: return "StepOutOfRange";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kEmptyCluster: return "EmptyCluster";
    case Errc::kInvalidRate: return "InvalidRate";
    case Errc::kInsufficientIdentities: return "InsufficientIdentities";
    case Errc::kBatchLargerThanPopulation: return "BatchLargerThanPopulation";
    case Errc::kNonDistribution: return "NonDistribution";
    case Errc::kEmptyBatch: return "EmptyBatch";
    case Errc::kTooFewDistinctPoints: return "TooFewDistinctPoints";
    case Errc::kNonPositiveVariance: return "NonPositiveVariance";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kDegenerateFit: return "DegenerateFit";
    case Errc::kNoRootBetweenMeans: return "NoRootBetweenMeans";
    case Errc::kDegenerateMeans: return "DegenerateMeans";
    case Errc::kInvalidLabel: return "InvalidLabel";
    case Errc::kDegenerateTrials: return "DegenerateTrials";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kUnknownUtterance: return "UnknownUtterance";
    case Errc::kMissingInput: return "MissingInput";
    case Errc::kFormat: return "Format";
  }
  return "Unknown";
}

namespace {

std::size_t Product(const std::vector<std::size_t> &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void CheckShape(const std::vector<std::size_t> &shape) {
  if (shape.empty() || shape.size() > 2)
    Fail(Errc::kShapeMismatch, "tensor rank must be 1 or 2");
  for (std::size_t d : shape)
    if (d == 0) Fail(Errc::kShapeMismatch, "tensor dimensions must be positive");
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)) {
  CheckShape(shape_);
  values_.assign(Product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  CheckShape(shape_);
  if (Product(shape_) != values_.size())
    Fail(Errc::kShapeMismatch, "product(shape) != number of values");
}

Tensor Tensor::Vector(std::vector<double> values) {
  if (values.empty()) Fail(Errc::kEmptyInput, "empty vector");
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::FromMatrix(const Matrix &m) {
  std::vector<double> v(m.data(), m.data() + m.size());
  return Tensor({static_cast<std::size_t>(m.rows()),
                 static_cast<std::size_t>(m.cols())},
                std::move(v));
}

Tensor Tensor::FromRow(const RowVector &v) {
  return Vector(std::vector<double>(v.data(), v.data() + v.size()));
}

std::size_t Tensor::rows() const { return rank() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const {
  return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 0);
}

Eigen::Map<Matrix> Tensor::AsMatrix() {
  return {values_.data(), static_cast<Eigen::Index>(rows()),
          static_cast<Eigen::Index>(cols())};
}

Eigen::Map<const Matrix> Tensor::AsMatrix() const {
  return {values_.data(), static_cast<Eigen::Index>(rows()),
          static_cast<Eigen::Index>(cols())};
}

Eigen::Map<const RowVector> Tensor::AsRow() const {
  return {values_.data(), static_cast<Eigen::Index>(values_.size())};
}

void Tensor::SetZero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool Tensor::AllFinite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace dlglc
