// include/dlglc/pipeline/report.h

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

#ifndef DLGLC_PIPELINE_REPORT_H_
#define DLGLC_PIPELINE_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "dlglc/lossgate/dlg-lc.h"

namespace dlglc {

inline constexpr int kReportVersion = 1;
inline constexpr int kMetricsVersion = 1;
inline constexpr int kLossRecordVersion = 1;
inline constexpr int kPlotVersion = 1;

// One report.jsonl line. Absent quantities are null.
// {version, iteration, epoch, stage, loss, lr, selection_rate,
//  selected_precision, tau1, gates, eer, min_dcf, eer_visual, min_dcf_visual,
//  nmi, purity, cluster_modality, wall_time}
nlohmann::json EmptyReportRow(int iteration, int epoch, const std::string &stage);

// Rows are append-only and strictly ordered by (iteration, epoch).
class RunReport {
 public:
  void Append(nlohmann::json row);
  const std::vector<nlohmann::json> &rows() const { return rows_; }

 private:
  std::vector<nlohmann::json> rows_;
};

void WriteReport(const std::filesystem::path &path, const RunReport &report);
// Throws MissingInput or Format.
RunReport ReadReport(const std::filesystem::path &path);
// The rows with wall_time removed, for reproducibility checks.
std::vector<nlohmann::json> WithoutWallTime(const RunReport &report);

// {version, metric, value, iteration, modality, config_hash}
struct MetricRow {
  std::string metric;
  double value = 0.0;
  int iteration = 0;
  std::string modality;
};
void AppendMetrics(const std::filesystem::path &path, const std::vector<MetricRow> &rows,
                   const std::string &config_hash);

// Per-sample gate audits as CSV with a "# version" comment first:
// epoch,sample_id,log_loss,branch,tau1,max_conf
void WriteLossRecords(const std::filesystem::path &path, const std::vector<SampleAudit> &audits);
std::vector<SampleAudit> ReadLossRecords(const std::filesystem::path &path);

// Formats a double so that parsing it back gives the same bits.
std::string ExactDouble(double v);
double ParseExactDouble(const std::string &s);

// Writes plots/ under a finished run directory: per-epoch log-loss values and
// histograms from each loss record, GMM fits per epoch, and metric
// trajectories per iteration. Returns the files written.
std::vector<std::filesystem::path> WritePlotData(const std::filesystem::path &run_dir,
                                                 int histogram_bins = 40);

}  // namespace dlglc

#endif  // DLGLC_PIPELINE_REPORT_H_
