// include/dlglc/numkit/json-file.h

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

#ifndef DLGLC_NUMKIT_JSON_FILE_H_
#define DLGLC_NUMKIT_JSON_FILE_H_

#include <filesystem>

#include "json.hpp"

namespace dlglc {

// Throws MissingInput when the file cannot be opened, Format when it does not
// parse.
nlohmann::json ReadJsonFile(const std::filesystem::path &path);
void WriteJsonFile(const std::filesystem::path &path, const nlohmann::json &j);

// Throws Format unless j["version"] == version.
void RequireVersion(const nlohmann::json &j, int version, const std::string &what);

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_JSON_FILE_H_
