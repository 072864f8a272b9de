// src/synthworld/world-io.cc

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

#include "dlglc/synthworld/world-io.h"

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/json-file.h"
#include "dlglc/numkit/tensor-json.h"

namespace dlglc {

using nlohmann::json;

namespace {

void CheckVersion(const json &j, const std::filesystem::path &path) {
  RequireVersion(j, kWorldFileVersion, path.string());
}

}  // namespace

json WorldConfigToJson(const WorldConfig &c) {
  return json{{"num_identities", c.num_identities},
              {"utterances_per_identity", c.utterances_per_identity},
              {"obs_dim_audio", c.obs_dim_audio},
              {"obs_dim_visual", c.obs_dim_visual},
              {"channel_noise_std", c.channel_noise_std},
              {"content_noise_std_long", c.content_noise_std_long},
              {"content_noise_std_short", c.content_noise_std_short},
              {"augment_noise_std", c.augment_noise_std},
              {"modality_correlation", c.modality_correlation},
              {"seed", c.seed}};
}

WorldConfig WorldConfigFromJson(const json &j) {
  WorldConfig c;
  try {
    c.num_identities = j.at("num_identities").get<int>();
    c.utterances_per_identity = j.at("utterances_per_identity").get<int>();
    c.obs_dim_audio = j.at("obs_dim_audio").get<int>();
    c.obs_dim_visual = j.at("obs_dim_visual").get<int>();
    c.channel_noise_std = j.at("channel_noise_std").get<double>();
    c.content_noise_std_long = j.at("content_noise_std_long").get<double>();
    c.content_noise_std_short = j.at("content_noise_std_short").get<double>();
    c.augment_noise_std = j.at("augment_noise_std").get<double>();
    c.modality_correlation = j.at("modality_correlation").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception &e) {
    Fail(Errc::kFormat, std::string("bad world config: ") + e.what());
  }
  return c;
}

void SaveWorld(const std::filesystem::path &path, const World &world,
               const TrialList &trials) {
  json j;
  j["version"] = kWorldFileVersion;
  j["config"] = WorldConfigToJson(world.config);
  json ids = json::array();
  for (const Identity &id : world.identities)
    ids.push_back({{"audio", id.audio_centroid}, {"visual", id.visual_centroid}});
  j["identities"] = std::move(ids);
  j["modality_map"] = world.modality_map;
  json utts = json::array();
  for (const Utterance &u : *world.utterances)
    utts.push_back({{"id", u.id}, {"audio", u.audio_base}, {"visual", u.visual_base}});
  j["utterances"] = std::move(utts);
  json tr = json::array();
  for (const Trial &t : trials.trials)
    tr.push_back({t.utterance_a, t.utterance_b, t.is_target});
  j["trials"] = std::move(tr);
  WriteJsonFile(path, j);
}

LoadedWorld LoadWorld(const std::filesystem::path &path) {
  json j = ReadJsonFile(path);
  CheckVersion(j, path);
  LoadedWorld out;
  try {
    out.world.config = WorldConfigFromJson(j.at("config"));
    for (const json &id : j.at("identities"))
      out.world.identities.push_back(
          {id.at("audio").get<Tensor>(), id.at("visual").get<Tensor>()});
    out.world.modality_map = j.at("modality_map").get<Tensor>();
    auto utts = std::make_shared<std::vector<Utterance>>();
    for (const json &u : j.at("utterances")) {
      Utterance utt;
      utt.id = u.at("id").get<int>();
      utt.audio_base = u.at("audio").get<Tensor>();
      utt.visual_base = u.at("visual").get<Tensor>();
      if (utt.id != static_cast<int>(utts->size()))
        Fail(Errc::kFormat, "utterances must be stored in id order");
      utts->push_back(std::move(utt));
    }
    out.world.utterances = std::move(utts);
    for (const json &t : j.at("trials"))
      out.trials.trials.push_back(
          {t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<bool>()});
  } catch (const json::exception &e) {
    Fail(Errc::kFormat, path.string() + ": " + e.what());
  }
  ValidateWorldConfig(out.world.config);
  return out;
}

void SaveTruth(const std::filesystem::path &path, const TruthMap &truth) {
  WriteJsonFile(path, json{{"version", kWorldFileVersion},
                           {"identity_of", truth.identity_of}});
}

TruthMap LoadTruth(const std::filesystem::path &path) {
  json j = ReadJsonFile(path);
  CheckVersion(j, path);
  TruthMap t;
  try {
    t.identity_of = j.at("identity_of").get<std::vector<int>>();
  } catch (const json::exception &e) {
    Fail(Errc::kFormat, path.string() + ": " + e.what());
  }
  return t;
}

}  // namespace dlglc
