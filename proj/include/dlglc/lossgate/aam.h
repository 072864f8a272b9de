// include/dlglc/lossgate/aam.h

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

#ifndef DLGLC_LOSSGATE_AAM_H_
#define DLGLC_LOSSGATE_AAM_H_

#include <optional>
#include <span>

#include "json.hpp"
#include "dlglc/numkit/autodiff.h"
#include "dlglc/numkit/tensor.h"

namespace dlglc {

struct AamConfig {
  double scale = 30.0;
  double margin = 0.2;
};

void ValidateAamConfig(const AamConfig &cfg);
void to_json(nlohmann::json &j, const AamConfig &cfg);
void from_json(const nlohmann::json &j, AamConfig &cfg);

struct AamResult {
  double loss = 0.0;
  Tensor probs;  // softmax of the margin logits
};

// Single embedding against class rows W [C x d].
AamResult AamLoss(const Tensor &embedding, int label, const Tensor &weights,
                  const AamConfig &cfg);

// -log softmax(logits)[label], accurate when the loss is far below 1e-16.
double CrossEntropyAt(const RowVector &logits, int label);

// Margin logits for a batch: cosines between normalized rows of x and W,
// with the margin on each row's label. Labels may be -1 for rows that only
// need cosines (no margin applied).
Matrix AamLogitValues(const Matrix &x, const Matrix &weights, std::span<const int> labels,
                      const AamConfig &cfg);
// s * cosine, no margin.
Matrix ScaledCosineValues(const Matrix &x, const Matrix &weights, double scale);

struct AamTape {
  ad::Var cosines;  // n x C
  ad::Var losses;   // n x 1, margin cross-entropy per row
};
AamTape AamOnTape(ad::Tape &tape, ad::Var x, ad::Var weights, std::span<const int> labels,
                  const AamConfig &cfg);

// softmax(log(p) / sharpness).
Tensor Sharpen(const Tensor &probs, double sharpness);

// Cross-entropy of p_aug against sharpen(p_clean); empty when max(p_clean)
// does not exceed the confidence gate.
std::optional<double> LcLoss(const Tensor &p_clean, const Tensor &p_aug,
                             double confidence_gate, double sharpness);

}  // namespace dlglc

#endif  // DLGLC_LOSSGATE_AAM_H_
