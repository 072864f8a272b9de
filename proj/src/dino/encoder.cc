// src/dino/encoder.cc

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

#include "dlglc/dino/encoder.h"

#include <cmath>
#include <string>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/tensor-json.h"

namespace dlglc {

namespace {

constexpr double kHeadNormFloor = 1e-12;

Param Weight(int out, int in, Rng &rng) {
  Tensor w({static_cast<std::size_t>(out), static_cast<std::size_t>(in)});
  double sd = std::sqrt(2.0 / in);
  for (double &v : w.values()) v = rng.Normal(0.0, sd);
  return Param(std::move(w));
}

Param Bias(int out) { return Param(Tensor({static_cast<std::size_t>(out)})); }

void CheckInput(const Matrix &views, const EncoderConfig &cfg) {
  if (views.cols() != cfg.input_dim)
    Fail(Errc::kShapeMismatch, "view width " + std::to_string(views.cols()) +
                                   " != encoder input_dim " + std::to_string(cfg.input_dim));
}

}  // namespace

void ValidateEncoderConfig(const EncoderConfig &cfg) {
  auto positive = [](int v, const char *name) {
    if (v < 1) Fail(Errc::kInvalidConfig, std::string(name) + " must be >= 1");
  };
  positive(cfg.input_dim, "input_dim");
  for (int h : cfg.hidden_dims) positive(h, "hidden_dims entry");
  positive(cfg.embed_dim, "embed_dim");
  positive(cfg.head_hidden_dim, "head_hidden_dim");
  positive(cfg.head_bottleneck_dim, "head_bottleneck_dim");
  positive(cfg.head_output_dim, "head_output_dim");
}

int NumEncoderLayers(const EncoderConfig &cfg) {
  return static_cast<int>(cfg.hidden_dims.size()) + 1;
}

std::size_t NumParamTensors(const EncoderConfig &cfg, bool with_head) {
  return 2 * NumEncoderLayers(cfg) + (with_head ? 8 : 0);
}

bool HasHead(const EncoderConfig &cfg, std::span<const Param> params) {
  if (params.size() == NumParamTensors(cfg, true)) return true;
  if (params.size() == NumParamTensors(cfg, false)) return false;
  Fail(Errc::kShapeMismatch, "parameter list does not match the encoder config");
}

Params InitParams(const EncoderConfig &cfg, bool with_head, Rng &rng) {
  ValidateEncoderConfig(cfg);
  Params p;
  int in = cfg.input_dim;
  std::vector<int> outs = cfg.hidden_dims;
  outs.push_back(cfg.embed_dim);
  for (int out : outs) {
    p.push_back(Weight(out, in, rng));
    p.push_back(Bias(out));
    in = out;
  }
  if (!with_head) return p;
  const int head_dims[3] = {cfg.head_hidden_dim, cfg.head_hidden_dim, cfg.head_bottleneck_dim};
  for (int out : head_dims) {
    p.push_back(Weight(out, in, rng));
    p.push_back(Bias(out));
    in = out;
  }
  Tensor v({static_cast<std::size_t>(cfg.head_output_dim),
            static_cast<std::size_t>(cfg.head_bottleneck_dim)});
  for (double &x : v.values()) x = rng.Normal(0.0, 1.0 / std::sqrt(cfg.head_bottleneck_dim));
  p.emplace_back(std::move(v));
  Tensor g({static_cast<std::size_t>(cfg.head_output_dim)});
  for (double &x : g.values()) x = 1.0;
  p.emplace_back(std::move(g));
  return p;
}

std::size_t CountScalars(std::span<const Param> params) {
  std::size_t n = 0;
  for (const Param &p : params) n += p.value.size();
  return n;
}

std::vector<ad::Var> BindParams(ad::Tape &tape, std::span<Param> params) {
  std::vector<ad::Var> bound;
  bound.reserve(params.size());
  for (Param &p : params) bound.push_back(tape.Leaf(p));
  return bound;
}

std::vector<ad::Var> BindConstants(ad::Tape &tape, std::span<const Param> params) {
  std::vector<ad::Var> bound;
  bound.reserve(params.size());
  for (const Param &p : params) {
    Matrix m = p.value.rank() == 1 ? Matrix(p.value.AsRow()) : Matrix(p.value.AsMatrix());
    bound.push_back(tape.Constant(std::move(m)));
  }
  return bound;
}

TapeOutputs ForwardOnTape(ad::Tape &tape, std::span<const ad::Var> bound,
                          ad::Var x, const EncoderConfig &cfg, bool with_head) {
  const int layers = NumEncoderLayers(cfg);
  if (bound.size() < NumParamTensors(cfg, with_head))
    Fail(Errc::kShapeMismatch, "too few bound parameters for the forward pass");
  ad::Var h = x;
  for (int l = 0; l < layers; ++l) {
    h = tape.Affine(h, bound[2 * l], bound[2 * l + 1]);
    if (l + 1 < layers) h = tape.Relu(h);
  }
  TapeOutputs out{h, ad::Var{}};
  if (!with_head) return out;
  std::size_t k = 2 * layers;
  ad::Var z = h;
  for (int l = 0; l < 3; ++l, k += 2) {
    z = tape.Affine(z, bound[k], bound[k + 1]);
    if (l < 2) z = tape.Relu(z);
  }
  z = tape.L2NormalizeRows(z, kHeadNormFloor);
  ad::Var w = tape.WeightNormRows(bound[k], bound[k + 1]);
  out.logits = tape.Affine(z, w, ad::Var{});
  return out;
}

ForwardResult Forward(std::span<const Param> params, const Tensor &view,
                      const EncoderConfig &cfg) {
  Matrix x = view.AsRow();
  CheckInput(x, cfg);
  if (!HasHead(cfg, params)) Fail(Errc::kShapeMismatch, "forward needs the projection head");
  ad::Tape tape;
  auto bound = BindConstants(tape, params);
  TapeOutputs o = ForwardOnTape(tape, bound, tape.Constant(std::move(x)), cfg, true);
  return {Tensor::FromRow(tape.value(o.embedding).row(0)),
          Tensor::FromRow(tape.value(o.logits).row(0))};
}

Matrix EmbedRows(std::span<const Param> params, const Matrix &views,
                 const EncoderConfig &cfg) {
  CheckInput(views, cfg);
  HasHead(cfg, params);
  const int layers = NumEncoderLayers(cfg);
  Matrix h = views;
  for (int l = 0; l < layers; ++l) {
    const Tensor &w = params[2 * l].value;
    const Tensor &b = params[2 * l + 1].value;
    Matrix next = h * w.AsMatrix().transpose();
    next.rowwise() += b.AsRow();
    if (l + 1 < layers) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

Matrix HeadLogitsRows(std::span<const Param> params, const Matrix &views,
                      const EncoderConfig &cfg) {
  CheckInput(views, cfg);
  if (!HasHead(cfg, params)) Fail(Errc::kShapeMismatch, "no projection head");
  ad::Tape tape;
  auto bound = BindConstants(tape, params);
  TapeOutputs o = ForwardOnTape(tape, bound, tape.Constant(views), cfg, true);
  return tape.value(o.logits);
}

void to_json(nlohmann::json &j, const EncoderConfig &cfg) {
  j = nlohmann::json{{"input_dim", cfg.input_dim},
                     {"hidden_dims", cfg.hidden_dims},
                     {"embed_dim", cfg.embed_dim},
                     {"head_hidden_dim", cfg.head_hidden_dim},
                     {"head_bottleneck_dim", cfg.head_bottleneck_dim},
                     {"head_output_dim", cfg.head_output_dim}};
}

void from_json(const nlohmann::json &j, EncoderConfig &cfg) {
  try {
    j.at("input_dim").get_to(cfg.input_dim);
    j.at("hidden_dims").get_to(cfg.hidden_dims);
    j.at("embed_dim").get_to(cfg.embed_dim);
    j.at("head_hidden_dim").get_to(cfg.head_hidden_dim);
    j.at("head_bottleneck_dim").get_to(cfg.head_bottleneck_dim);
    j.at("head_output_dim").get_to(cfg.head_output_dim);
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kFormat, std::string("bad encoder config: ") + e.what());
  }
  ValidateEncoderConfig(cfg);
}

nlohmann::json ParamsToJson(std::span<const Param> params) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Param &p : params) arr.push_back(p.value);
  return arr;
}

Params ParamsFromJson(const nlohmann::json &j) {
  if (!j.is_array()) Fail(Errc::kFormat, "parameter list must be an array");
  Params p;
  for (const auto &t : j) p.emplace_back(t.get<Tensor>());
  return p;
}

}  // namespace dlglc
