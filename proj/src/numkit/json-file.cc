// src/numkit/json-file.cc

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

#include "dlglc/numkit/json-file.h"

#include <fstream>

#include "dlglc/numkit/error.h"

namespace dlglc {

nlohmann::json ReadJsonFile(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kMissingInput, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kFormat, path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path &path, const nlohmann::json &j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) Fail(Errc::kMissingInput, "cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) Fail(Errc::kMissingInput, "write failed: " + path.string());
}

void RequireVersion(const nlohmann::json &j, int version, const std::string &what) {
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != version)
    Fail(Errc::kFormat, what + ": missing or unsupported version");
}

}  // namespace dlglc
