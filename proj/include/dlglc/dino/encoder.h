// include/dlglc/dino/encoder.h

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

#ifndef DLGLC_DINO_ENCODER_H_
#define DLGLC_DINO_ENCODER_H_

#include <span>
#include <vector>

#include "json.hpp"
#include "dlglc/numkit/autodiff.h"
#include "dlglc/numkit/rng.h"
#include "dlglc/numkit/tensor.h"

namespace dlglc {

struct EncoderConfig {
  int input_dim = 32;
  std::vector<int> hidden_dims = {128};
  int embed_dim = 32;
  int head_hidden_dim = 256;
  int head_bottleneck_dim = 64;
  int head_output_dim = 1024;
};

// Throws InvalidConfig unless every dimension is >= 1.
void ValidateEncoderConfig(const EncoderConfig &cfg);

// Flat parameter list. Encoder layers come first as (W, b) pairs, one per
// hidden layer plus the embedding layer. When a projection head is present it
// follows as three (W, b) pairs, then the weight-normalized output direction
// v [K x bottleneck] and its gains g [K].
using Params = std::vector<Param>;

int NumEncoderLayers(const EncoderConfig &cfg);
std::size_t NumParamTensors(const EncoderConfig &cfg, bool with_head);
bool HasHead(const EncoderConfig &cfg, std::span<const Param> params);

// He-normal weights, zero biases, unit head gains.
Params InitParams(const EncoderConfig &cfg, bool with_head, Rng &rng);

// Total number of scalars; used for logging and checkpoint sanity checks.
std::size_t CountScalars(std::span<const Param> params);

struct TapeOutputs {
  ad::Var embedding;
  ad::Var logits;  // invalid when the head is not evaluated
};

// Gradient leaves; Backward() accumulates into each Param's grad.
std::vector<ad::Var> BindParams(ad::Tape &tape, std::span<Param> params);
// Constants; nothing downstream of these receives a gradient.
std::vector<ad::Var> BindConstants(ad::Tape &tape, std::span<const Param> params);

// Batched forward pass; x holds one view per row.
TapeOutputs ForwardOnTape(ad::Tape &tape, std::span<const ad::Var> bound,
                          ad::Var x, const EncoderConfig &cfg, bool with_head);

struct ForwardResult {
  Tensor embedding;
  Tensor head_logits;
};

// Single view; requires the head.
ForwardResult Forward(std::span<const Param> params, const Tensor &view,
                      const EncoderConfig &cfg);

// Embeddings (pre-head) for a stack of views, one per row.
Matrix EmbedRows(std::span<const Param> params, const Matrix &views,
                 const EncoderConfig &cfg);
// Head logits for a stack of views, one per row.
Matrix HeadLogitsRows(std::span<const Param> params, const Matrix &views,
                      const EncoderConfig &cfg);

void to_json(nlohmann::json &j, const EncoderConfig &cfg);
void from_json(const nlohmann::json &j, EncoderConfig &cfg);

nlohmann::json ParamsToJson(std::span<const Param> params);
Params ParamsFromJson(const nlohmann::json &j);

}  // namespace dlglc

#endif  // DLGLC_DINO_ENCODER_H_
