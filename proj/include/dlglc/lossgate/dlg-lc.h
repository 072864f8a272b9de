// include/dlglc/lossgate/dlg-lc.h

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

#ifndef DLGLC_LOSSGATE_DLG_LC_H_
#define DLGLC_LOSSGATE_DLG_LC_H_

#include <span>
#include <string_view>
#include <vector>

#include "dlglc/lossgate/aam.h"
#include "dlglc/lossgate/gate.h"
#include "dlglc/numkit/autodiff.h"

namespace dlglc {

// none: every sample reliable. fixed / dlg: unreliable samples are skipped.
// dlg_lc: unreliable samples go through label correction.
enum class SelectionMode { kNone, kFixed, kDlg, kDlgLc };
std::string_view SelectionModeName(SelectionMode m);
SelectionMode ParseSelectionMode(std::string_view s);

struct SampleAudit {
  int epoch = 0;
  int sample_id = 0;
  double log_loss = 0.0;  // log of the clean-view margin loss
  Branch branch = Branch::kReliable;
  double tau1 = 0.0;
  double max_conf = 0.0;  // of the margin-free clean prediction
};

struct DlgStepResult {
  ad::Var total;  // mean over the batch; skipped samples add 0
  std::vector<SampleAudit> audit;
};

struct DlgBatch {
  const Matrix *clean = nullptr;  // clean-view embeddings, values only
  ad::Var augmented;              // augmented-view embeddings on the tape
  ad::Var weights;                // class rows on the tape
};

// One batch of the gated objective. Appends every clean loss to
// gate.loss_record in batch order. The clean pathway never receives a
// gradient.
DlgStepResult DlgLcStep(ad::Tape &tape, const DlgBatch &batch, std::span<const int> labels,
                        std::span<const int> sample_ids, int epoch, GateState &gate,
                        const AamConfig &aam, bool label_correction);

struct MmStepResult {
  ad::Var total;
  std::vector<SampleAudit> audio;
  std::vector<SampleAudit> visual;
  std::vector<MmDecision> decisions;
};

// Two-encoder version: both gates must pass for a reliable sample, agreeing
// predictions give a hard label, otherwise each modality is corrected
// against its own clean prediction. Without label_correction every
// non-reliable sample is skipped.
MmStepResult MmDlgLcStep(ad::Tape &tape, const DlgBatch &audio, const DlgBatch &visual,
                         std::span<const int> labels, std::span<const int> sample_ids,
                         int epoch, GateState &gate_audio, GateState &gate_visual,
                         const AamConfig &aam, bool label_correction);

}  // namespace dlglc

#endif  // DLGLC_LOSSGATE_DLG_LC_H_
