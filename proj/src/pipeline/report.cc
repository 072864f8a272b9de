// src/pipeline/report.cc

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

#include "dlglc/pipeline/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/json-file.h"

namespace dlglc {

using nlohmann::json;

namespace {

Branch ParseBranch(const std::string &s) {
  for (Branch b : {Branch::kReliable, Branch::kCorrected, Branch::kSkipped, Branch::kHardLabel})
    if (BranchName(b) == s) return b;
  Fail(Errc::kFormat, "unknown branch '" + s + "'");
}

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::ofstream OpenOut(const std::filesystem::path &path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::out | mode);
  if (!f) Fail(Errc::kMissingInput, "cannot write " + path.string());
  return f;
}

std::ifstream OpenIn(const std::filesystem::path &path) {
  std::ifstream f(path);
  if (!f) Fail(Errc::kMissingInput, "cannot open " + path.string());
  return f;
}

// Skips the "# version=N" header and checks N.
void ReadCsvHeader(std::ifstream &f, int version, const std::string &columns,
                   const std::filesystem::path &path) {
  std::string line;
  if (!std::getline(f, line) || line != "# version=" + std::to_string(version))
    Fail(Errc::kFormat, path.string() + ": missing or wrong version line");
  if (!std::getline(f, line) || line != columns)
    Fail(Errc::kFormat, path.string() + ": unexpected columns");
}

void WriteCsvHeader(std::ofstream &f, int version, const std::string &columns) {
  f << "# version=" << version << "\n" << columns << "\n";
}

constexpr char kLossColumns[] = "epoch,sample_id,log_loss,branch,tau1,max_conf";

std::string Cell(const json &v) {
  if (v.is_null()) return "";
  if (v.is_number()) return ExactDouble(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string ExactDouble(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double ParseExactDouble(const std::string &s) {
  double v = 0;
  const char *b = s.data(), *e = s.data() + s.size();
  // from_chars does not take a leading '+'.
  if (b != e && *b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) Fail(Errc::kFormat, "bad number '" + s + "'");
  return v;
}

json EmptyReportRow(int iteration, int epoch, const std::string &stage) {
  return json{{"version", kReportVersion}, {"iteration", iteration}, {"epoch", epoch},
              {"stage", stage},            {"loss", nullptr},        {"lr", nullptr},
              {"selection_rate", nullptr}, {"selected_precision", nullptr},
              {"tau1", nullptr},           {"gates", nullptr},       {"eer", nullptr},
              {"min_dcf", nullptr},        {"eer_visual", nullptr},  {"min_dcf_visual", nullptr},
              {"nmi", nullptr},            {"purity", nullptr},      {"cluster_modality", nullptr},
              {"wall_time", nullptr}};
}

void RunReport::Append(json row) {
  const int it = row.at("iteration").get<int>(), ep = row.at("epoch").get<int>();
  if (!rows_.empty()) {
    const int pit = rows_.back().at("iteration").get<int>(), pep = rows_.back().at("epoch").get<int>();
    if (std::pair(it, ep) <= std::pair(pit, pep))
      Fail(Errc::kFormat, "report rows must be strictly ordered by (iteration, epoch)");
  }
  rows_.push_back(std::move(row));
}

void WriteReport(const std::filesystem::path &path, const RunReport &report) {
  std::ofstream f = OpenOut(path);
  for (const json &r : report.rows()) f << r.dump() << "\n";
}

RunReport ReadReport(const std::filesystem::path &path) {
  std::ifstream f = OpenIn(path);
  RunReport report;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
      RequireVersion(row, kReportVersion, "report row");
      report.Append(std::move(row));
    } catch (const json::exception &e) {
      Fail(Errc::kFormat, std::string("bad report row: ") + e.what());
    }
  }
  return report;
}

std::vector<json> WithoutWallTime(const RunReport &report) {
  std::vector<json> out = report.rows();
  for (json &r : out) r.erase("wall_time");
  return out;
}

void AppendMetrics(const std::filesystem::path &path, const std::vector<MetricRow> &rows,
                   const std::string &config_hash) {
  std::ofstream f = OpenOut(path, std::ios::app);
  for (const MetricRow &m : rows)
    f << json{{"version", kMetricsVersion}, {"metric", m.metric},         {"value", m.value},
              {"iteration", m.iteration},  {"modality", m.modality}, {"config_hash", config_hash}}
             .dump()
      << "\n";
}

void WriteLossRecords(const std::filesystem::path &path, const std::vector<SampleAudit> &audits) {
  std::ofstream f = OpenOut(path);
  WriteCsvHeader(f, kLossRecordVersion, kLossColumns);
  for (const SampleAudit &a : audits)
    f << a.epoch << ',' << a.sample_id << ',' << ExactDouble(a.log_loss) << ',' << BranchName(a.branch)
      << ',' << ExactDouble(a.tau1) << ',' << ExactDouble(a.max_conf) << "\n";
}

std::vector<SampleAudit> ReadLossRecords(const std::filesystem::path &path) {
  std::ifstream f = OpenIn(path);
  ReadCsvHeader(f, kLossRecordVersion, kLossColumns, path);
  std::vector<SampleAudit> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto c = SplitCsv(line);
    if (c.size() != 6) Fail(Errc::kFormat, path.string() + ": expected 6 columns");
    SampleAudit a;
    a.epoch = static_cast<int>(ParseExactDouble(c[0]));
    a.sample_id = static_cast<int>(ParseExactDouble(c[1]));
    a.log_loss = ParseExactDouble(c[2]);
    a.branch = ParseBranch(c[3]);
    a.tau1 = ParseExactDouble(c[4]);
    a.max_conf = ParseExactDouble(c[5]);
    out.push_back(a);
  }
  return out;
}

std::vector<std::filesystem::path> WritePlotData(const std::filesystem::path &run_dir,
                                                 int histogram_bins) {
  if (histogram_bins < 1) Fail(Errc::kInvalidConfig, "histogram needs at least one bin");
  const std::filesystem::path report_path = run_dir / "report.jsonl";
  if (!std::filesystem::exists(report_path))
    Fail(Errc::kMissingInput, "no report.jsonl in " + run_dir.string());
  RunReport report = ReadReport(report_path);
  const std::filesystem::path plots = run_dir / "plots";
  std::vector<std::filesystem::path> written;

  // Loss values and histograms, one pair of files per loss record.
  std::vector<std::filesystem::path> records;
  if (std::filesystem::is_directory(run_dir / "loss_records"))
    for (const auto &e : std::filesystem::directory_iterator(run_dir / "loss_records"))
      if (e.path().extension() == ".csv") records.push_back(e.path());
  std::sort(records.begin(), records.end());
  for (const auto &rec : records) {
    std::vector<SampleAudit> audits = ReadLossRecords(rec);
    const std::string stem = rec.stem().string();

    auto values_path = plots / ("loss_values-" + stem + ".csv");
    std::ofstream v = OpenOut(values_path);
    WriteCsvHeader(v, kPlotVersion, "epoch,sample_id,log_loss,branch");
    for (const SampleAudit &a : audits)
      v << a.epoch << ',' << a.sample_id << ',' << ExactDouble(a.log_loss) << ','
        << BranchName(a.branch) << "\n";
    written.push_back(values_path);

    double lo = INFINITY, hi = -INFINITY;
    for (const SampleAudit &a : audits)
      if (std::isfinite(a.log_loss)) {
        lo = std::min(lo, a.log_loss);
        hi = std::max(hi, a.log_loss);
      }
    auto hist_path = plots / ("loss_hist-" + stem + ".csv");
    std::ofstream h = OpenOut(hist_path);
    WriteCsvHeader(h, kPlotVersion, "epoch,bin_lo,bin_hi,count,reliable,tau1");
    std::map<int, std::vector<const SampleAudit *>> by_epoch;
    for (const SampleAudit &a : audits) by_epoch[a.epoch].push_back(&a);
    if (lo <= hi) {
      const double width = hi > lo ? (hi - lo) / histogram_bins : 1.0;
      for (const auto &[epoch, list] : by_epoch) {
        std::vector<int> count(histogram_bins), reliable(histogram_bins);
        for (const SampleAudit *a : list) {
          if (!std::isfinite(a->log_loss)) continue;
          int b = std::min(histogram_bins - 1, static_cast<int>((a->log_loss - lo) / width));
          ++count[b];
          reliable[b] += a->branch == Branch::kReliable;
        }
        for (int b = 0; b < histogram_bins; ++b)
          h << epoch << ',' << ExactDouble(lo + b * width) << ',' << ExactDouble(lo + (b + 1) * width)
            << ',' << count[b] << ',' << reliable[b] << ',' << ExactDouble(list.front()->tau1) << "\n";
      }
    }
    written.push_back(hist_path);
  }

  // GMM fits and gate statistics per epoch.
  auto gmm_path = plots / "gate_epochs.csv";
  std::ofstream g = OpenOut(gmm_path);
  WriteCsvHeader(g, kPlotVersion,
                 "iteration,epoch,modality,tau1,selection_rate,selected_precision,refresh,"
                 "weight1,weight2,mean1,mean2,var1,var2,next_tau1");
  for (const json &r : report.rows()) {
    if (r.at("stage") != "stage2" || !r.at("gates").is_object()) continue;
    for (const auto &[mod, gate] : r.at("gates").items()) {
      const json gmm = gate.value("gmm", json());
      g << r.at("iteration").get<int>() << ',' << r.at("epoch").get<int>() << ',' << mod << ','
        << Cell(gate.at("tau1")) << ',' << Cell(gate.at("selection_rate")) << ','
        << Cell(gate.at("selected_precision")) << ',' << Cell(gate.at("refresh"));
      for (const char *k : {"weight1", "weight2", "mean1", "mean2", "var1", "var2"})
        g << ',' << (gmm.is_object() ? Cell(gmm.at(k)) : "");
      g << ',' << Cell(gate.at("next_tau1")) << "\n";
    }
  }
  written.push_back(gmm_path);

  // Metric trajectory over iterations.
  auto traj_path = plots / "metrics_by_iteration.csv";
  std::ofstream t = OpenOut(traj_path);
  const char *keys[] = {"eer", "min_dcf", "eer_visual", "min_dcf_visual", "nmi", "purity"};
  WriteCsvHeader(t, kPlotVersion, "iteration,eer,min_dcf,eer_visual,min_dcf_visual,nmi,purity,cluster_modality");
  for (const json &r : report.rows()) {
    if (r.at("stage") != "eval") continue;
    t << r.at("iteration").get<int>();
    for (const char *k : keys) t << ',' << Cell(r.at(k));
    t << ',' << Cell(r.at("cluster_modality")) << "\n";
  }
  written.push_back(traj_path);
  return written;
}

}  // namespace dlglc
