// src/lossgate/aam.cc

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

#include "dlglc/lossgate/aam.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/vector-ops.h"

namespace dlglc {

namespace {

void CheckDistribution(const Tensor &p) {
  double sum = 0;
  for (double v : p.values()) {
    if (!(v >= 0.0)) Fail(Errc::kNonDistribution, "negative or NaN probability");
    sum += v;
  }
  if (p.size() == 0 || std::abs(sum - 1.0) > 1e-9)
    Fail(Errc::kNonDistribution, "probabilities do not sum to 1");
}

Matrix NormalizedRows(const Matrix &m) {
  Matrix out = m;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (!(n > 0)) Fail(Errc::kZeroVector, "aam needs nonzero rows");
    out.row(r) /= n;
  }
  return out;
}

Matrix Cosines(const Matrix &x, const Matrix &weights) {
  if (x.cols() != weights.cols()) Fail(Errc::kShapeMismatch, "aam embedding width != class width");
  return NormalizedRows(x) * NormalizedRows(weights).transpose();
}

}  // namespace

void ValidateAamConfig(const AamConfig &cfg) {
  if (!(cfg.scale > 0)) Fail(Errc::kInvalidConfig, "aam scale must be > 0");
  if (!(cfg.margin >= 0 && cfg.margin < std::numbers::pi / 2))
    Fail(Errc::kInvalidConfig, "aam margin must be in [0, pi/2)");
}

void to_json(nlohmann::json &j, const AamConfig &cfg) {
  j = nlohmann::json{{"scale", cfg.scale}, {"margin", cfg.margin}};
}

void from_json(const nlohmann::json &j, AamConfig &cfg) {
  try {
    j.at("scale").get_to(cfg.scale);
    j.at("margin").get_to(cfg.margin);
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kFormat, std::string("bad aam config: ") + e.what());
  }
  ValidateAamConfig(cfg);
}

double CrossEntropyAt(const RowVector &logits, int label) {
  if (label < 0 || label >= logits.size()) Fail(Errc::kInvalidLabel, "label out of range");
  const double zy = logits(label);
  double rest = 0;
  double m = zy;
  for (Eigen::Index j = 0; j < logits.size(); ++j) m = std::max(m, logits(j));
  if (m == zy) {
    for (Eigen::Index j = 0; j < logits.size(); ++j)
      if (j != label) rest += std::exp(logits(j) - zy);
    return std::log1p(rest);
  }
  double s = 0;
  for (Eigen::Index j = 0; j < logits.size(); ++j) s += std::exp(logits(j) - m);
  return m - zy + std::log(s);
}

Matrix ScaledCosineValues(const Matrix &x, const Matrix &weights, double scale) {
  return scale * Cosines(x, weights);
}

Matrix AamLogitValues(const Matrix &x, const Matrix &weights, std::span<const int> labels,
                      const AamConfig &cfg) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    Fail(Errc::kShapeMismatch, "aam: one label per row required");
  const Matrix c = Cosines(x, weights);
  Matrix z = cfg.scale * c;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y == -1) continue;
    if (y < 0 || y >= z.cols()) Fail(Errc::kInvalidLabel, "aam label out of range");
    // cos(acos(c) + m), same form as the tape op.
    const double sine = std::sqrt(std::max(1.0 - c(r, y) * c(r, y), 0.0));
    z(r, y) = cfg.scale * (c(r, y) * std::cos(cfg.margin) - sine * std::sin(cfg.margin));
  }
  return z;
}

AamResult AamLoss(const Tensor &embedding, int label, const Tensor &weights,
                  const AamConfig &cfg) {
  ValidateAamConfig(cfg);
  if (weights.rank() != 2) Fail(Errc::kShapeMismatch, "aam weights must be a matrix");
  if (label < 0 || label >= static_cast<int>(weights.shape()[0]))
    Fail(Errc::kInvalidLabel, "aam label out of range");
  const int labels[1] = {label};
  Matrix z = AamLogitValues(embedding.AsRow(), weights.AsMatrix(), labels, cfg);
  RowVector row = z.row(0);
  return {CrossEntropyAt(row, label), SoftmaxTemp(Tensor::FromRow(row), 1.0)};
}

AamTape AamOnTape(ad::Tape &tape, ad::Var x, ad::Var weights, std::span<const int> labels,
                  const AamConfig &cfg) {
  ad::Var cos = tape.Affine(tape.L2NormalizeRows(x), tape.L2NormalizeRows(weights), ad::Var{});
  ad::Var logits = tape.AamLogits(cos, labels, cfg.scale, cfg.margin);
  ad::Var logq = tape.LogSoftmaxRows(logits, 1.0);
  const Matrix &lq = tape.value(logq);
  Matrix onehot = Matrix::Zero(lq.rows(), lq.cols());
  for (Eigen::Index r = 0; r < lq.rows(); ++r) onehot(r, labels[static_cast<std::size_t>(r)]) = 1.0;
  return {cos, tape.CrossEntropyRows(onehot, logq)};
}

Tensor Sharpen(const Tensor &probs, double sharpness) {
  CheckDistribution(probs);
  if (!(sharpness > 0)) Fail(Errc::kNonPositiveTemperature, "sharpness must be > 0");
  RowVector lp(static_cast<Eigen::Index>(probs.size()));
  const auto v = probs.values();
  for (std::size_t k = 0; k < v.size(); ++k)
    lp(static_cast<Eigen::Index>(k)) = v[k] > 0 ? std::log(v[k]) / sharpness
                                                : -std::numeric_limits<double>::infinity();
  const double m = lp.maxCoeff();
  RowVector e = (lp.array() - m).exp().matrix();
  return Tensor::FromRow(e / e.sum());
}

std::optional<double> LcLoss(const Tensor &p_clean, const Tensor &p_aug,
                             double confidence_gate, double sharpness) {
  CheckDistribution(p_clean);
  CheckDistribution(p_aug);
  if (p_clean.size() != p_aug.size()) Fail(Errc::kShapeMismatch, "lc distributions differ in length");
  if (!(p_clean.AsRow().maxCoeff() > confidence_gate)) return std::nullopt;
  Tensor target = Sharpen(p_clean, sharpness);
  double h = 0;
  const auto t = target.values();
  const auto q = p_aug.values();
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] > 0) h -= t[k] * std::log(q[k]);
  return h;
}

}  // namespace dlglc
