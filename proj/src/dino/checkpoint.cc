// src/dino/checkpoint.cc

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

#include "dlglc/dino/checkpoint.h"

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/json-file.h"
#include "dlglc/numkit/tensor-json.h"

namespace dlglc {

using nlohmann::json;

json Stage1CheckpointToJson(const ModelState &state, const DinoHyper &hyper) {
  return json{{"version", kCheckpointVersion},
              {"kind", "stage1"},
              {"cfg", state.cfg},
              {"hyper", hyper},
              {"step", state.step},
              {"student", ParamsToJson(state.student)},
              {"teacher", ParamsToJson(state.teacher)},
              {"center", state.center}};
}

Stage1Checkpoint Stage1CheckpointFromJson(const json &j) {
  RequireVersion(j, kCheckpointVersion, "stage-1 checkpoint");
  Stage1Checkpoint c;
  try {
    if (j.at("kind").get<std::string>() != "stage1")
      Fail(Errc::kFormat, "not a stage-1 checkpoint");
    c.state.cfg = j.at("cfg").get<EncoderConfig>();
    c.hyper = j.at("hyper").get<DinoHyper>();
    c.state.step = j.at("step").get<std::int64_t>();
    c.state.student = ParamsFromJson(j.at("student"));
    c.state.teacher = ParamsFromJson(j.at("teacher"));
    c.state.center = j.at("center").get<Tensor>();
  } catch (const json::exception &e) {
    Fail(Errc::kFormat, std::string("bad stage-1 checkpoint: ") + e.what());
  }
  if (!HasHead(c.state.cfg, c.state.student) || c.state.teacher.size() != c.state.student.size())
    Fail(Errc::kFormat, "checkpoint parameters do not match its config");
  for (std::size_t i = 0; i < c.state.student.size(); ++i)
    if (!c.state.student[i].value.SameShape(c.state.teacher[i].value))
      Fail(Errc::kFormat, "student and teacher shapes differ");
  if (c.state.center.size() != static_cast<std::size_t>(c.state.cfg.head_output_dim))
    Fail(Errc::kFormat, "center length differs from head output");
  return c;
}

void SaveStage1Checkpoint(const std::filesystem::path &path, const ModelState &state,
                          const DinoHyper &hyper) {
  WriteJsonFile(path, Stage1CheckpointToJson(state, hyper));
}

Stage1Checkpoint LoadStage1Checkpoint(const std::filesystem::path &path) {
  return Stage1CheckpointFromJson(ReadJsonFile(path));
}

}  // namespace dlglc
