// src/lossgate/dlg-lc.cc

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

#include "dlglc/lossgate/dlg-lc.h"

#include <cmath>
#include <limits>
#include <string>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/vector-ops.h"

namespace dlglc {

namespace {

// Per-sample values of the clean view.
struct CleanView {
  std::vector<double> loss;
  Matrix probs;  // margin-free
};

CleanView EvaluateClean(const Matrix &clean, const Matrix &weights, std::span<const int> labels,
                        const AamConfig &aam) {
  CleanView out;
  Matrix z = AamLogitValues(clean, weights, labels, aam);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    RowVector row = z.row(r);
    const double l = CrossEntropyAt(row, labels[static_cast<std::size_t>(r)]);
    out.loss.push_back(std::max(l, std::numeric_limits<double>::min()));
  }
  kernels::SoftmaxRows(ScaledCosineValues(clean, weights, aam.scale), 1.0, &out.probs);
  return out;
}

void CheckBatch(const ad::Tape &tape, const DlgBatch &b, std::size_t n) {
  if (b.clean == nullptr) Fail(Errc::kEmptyBatch, "missing clean embeddings");
  if (b.clean->rows() != static_cast<Eigen::Index>(n) ||
      tape.value(b.augmented).rows() != static_cast<Eigen::Index>(n))
    Fail(Errc::kShapeMismatch, "batch rows differ from the label count");
}

// Margin-free log-probabilities of the augmented view.
ad::Var AugLogProbs(ad::Tape &tape, const AamTape &t, const AamConfig &aam) {
  return tape.LogSoftmaxRows(tape.Scale(t.cosines, aam.scale), 1.0);
}

SampleAudit Audit(int epoch, int id, double loss, Branch b, double tau1, double conf) {
  return {epoch, id, std::log(loss), b, tau1, conf};
}

}  // namespace

std::string_view SelectionModeName(SelectionMode m) {
  switch (m) {
    case SelectionMode::kNone: return "none";
    case SelectionMode::kFixed: return "fixed";
    case SelectionMode::kDlg: return "dlg";
    case SelectionMode::kDlgLc: return "dlg_lc";
  }
  return "unknown";
}

SelectionMode ParseSelectionMode(std::string_view s) {
  for (SelectionMode m : {SelectionMode::kNone, SelectionMode::kFixed, SelectionMode::kDlg,
                          SelectionMode::kDlgLc})
    if (SelectionModeName(m) == s) return m;
  Fail(Errc::kInvalidConfig, "unknown selection mode: " + std::string(s));
}

DlgStepResult DlgLcStep(ad::Tape &tape, const DlgBatch &batch, std::span<const int> labels,
                        std::span<const int> sample_ids, int epoch, GateState &gate,
                        const AamConfig &aam, bool label_correction) {
  ValidateGate(gate);
  ValidateAamConfig(aam);
  const std::size_t n = labels.size();
  if (n == 0) Fail(Errc::kEmptyBatch, "dlg step on an empty batch");
  if (sample_ids.size() != n) Fail(Errc::kShapeMismatch, "one sample id per label required");
  CheckBatch(tape, batch, n);

  CleanView clean = EvaluateClean(*batch.clean, tape.value(batch.weights), labels, aam);
  AamTape aug = AamOnTape(tape, batch.augmented, batch.weights, labels, aam);

  std::vector<double> w_rel(n, 0.0), w_lc(n, 0.0);
  Matrix target = Matrix::Zero(static_cast<Eigen::Index>(n), clean.probs.cols());
  DlgStepResult out;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double l = clean.loss[i];
    gate.loss_record.push_back(l);
    const double conf = clean.probs.row(r).maxCoeff();
    Branch b;
    if (std::log(l) < gate.tau1) {
      b = Branch::kReliable;
      w_rel[i] = inv;
    } else if (label_correction && conf > gate.tau2) {
      b = Branch::kCorrected;
      w_lc[i] = inv;
      target.row(r) = Sharpen(Tensor::FromRow(clean.probs.row(r)), gate.sharpness).AsRow();
    } else {
      b = Branch::kSkipped;
    }
    out.audit.push_back(Audit(epoch, sample_ids[i], l, b, gate.tau1, conf));
  }
  ad::Var lc = tape.CrossEntropyRows(target, AugLogProbs(tape, aug, aam));
  out.total = tape.Add(tape.WeightedRowSum(aug.losses, w_rel), tape.WeightedRowSum(lc, w_lc));
  return out;
}

MmStepResult MmDlgLcStep(ad::Tape &tape, const DlgBatch &audio, const DlgBatch &visual,
                         std::span<const int> labels, std::span<const int> sample_ids,
                         int epoch, GateState &gate_audio, GateState &gate_visual,
                         const AamConfig &aam, bool label_correction) {
  ValidateGate(gate_audio);
  ValidateGate(gate_visual);
  ValidateAamConfig(aam);
  const std::size_t n = labels.size();
  if (n == 0) Fail(Errc::kEmptyBatch, "dlg step on an empty batch");
  if (sample_ids.size() != n) Fail(Errc::kShapeMismatch, "one sample id per label required");
  CheckBatch(tape, audio, n);
  CheckBatch(tape, visual, n);

  CleanView ca = EvaluateClean(*audio.clean, tape.value(audio.weights), labels, aam);
  CleanView cv = EvaluateClean(*visual.clean, tape.value(visual.weights), labels, aam);
  if (ca.probs.cols() != cv.probs.cols())
    Fail(Errc::kShapeMismatch, "audio and visual class counts differ");

  MmStepResult out;
  std::vector<int> eff(labels.begin(), labels.end());
  std::vector<double> w_aam(n, 0.0), wa_lc(n, 0.0), wv_lc(n, 0.0);
  Matrix ta = Matrix::Zero(static_cast<Eigen::Index>(n), ca.probs.cols());
  Matrix tv = ta;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    gate_audio.loss_record.push_back(ca.loss[i]);
    gate_visual.loss_record.push_back(cv.loss[i]);
    Tensor pa = Tensor::FromRow(ca.probs.row(r)), pv = Tensor::FromRow(cv.probs.row(r));
    MmDecision d = MmGate(ca.loss[i], cv.loss[i], gate_audio.tau1, gate_visual.tau1, pa, pv,
                          gate_audio.tau2);
    if (d.kind != MmKind::kReliable && !label_correction) {
      d = MmDecision{};
      d.kind = MmKind::kSkip;
    }
    switch (d.kind) {
      case MmKind::kReliable:
        w_aam[i] = inv;
        break;
      case MmKind::kHardLabel:
        eff[i] = d.hard_class;
        w_aam[i] = inv;
        break;
      case MmKind::kSoftLabel:
        if (d.audio == Branch::kCorrected) {
          wa_lc[i] = inv;
          ta.row(r) = Sharpen(pa, gate_audio.sharpness).AsRow();
        }
        if (d.visual == Branch::kCorrected) {
          wv_lc[i] = inv;
          tv.row(r) = Sharpen(pv, gate_visual.sharpness).AsRow();
        }
        break;
      case MmKind::kSkip:
        break;
    }
    out.audio.push_back(Audit(epoch, sample_ids[i], ca.loss[i], d.audio, gate_audio.tau1,
                              pa.AsRow().maxCoeff()));
    out.visual.push_back(Audit(epoch, sample_ids[i], cv.loss[i], d.visual, gate_visual.tau1,
                               pv.AsRow().maxCoeff()));
    out.decisions.push_back(d);
  }
  AamTape aa = AamOnTape(tape, audio.augmented, audio.weights, eff, aam);
  AamTape av = AamOnTape(tape, visual.augmented, visual.weights, eff, aam);
  ad::Var lca = tape.CrossEntropyRows(ta, AugLogProbs(tape, aa, aam));
  ad::Var lcv = tape.CrossEntropyRows(tv, AugLogProbs(tape, av, aam));
  out.total = tape.Add(tape.Add(tape.WeightedRowSum(aa.losses, w_aam), tape.WeightedRowSum(av.losses, w_aam)),
                       tape.Add(tape.WeightedRowSum(lca, wa_lc), tape.WeightedRowSum(lcv, wv_lc)));
  return out;
}

}  // namespace dlglc
