// include/dlglc/numkit/tensor-json.h

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

#ifndef DLGLC_NUMKIT_TENSOR_JSON_H_
#define DLGLC_NUMKIT_TENSOR_JSON_H_

#include "json.hpp"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/tensor.h"

namespace dlglc {

// Doubles are written with round-trip precision, so a save/load cycle is
// bit-exact.
inline void to_json(nlohmann::json &j, const Tensor &t) {
  j = nlohmann::json{{"shape", t.shape()}, {"values", t.data()}};
}

inline void from_json(const nlohmann::json &j, Tensor &t) {
  try {
    t = Tensor(j.at("shape").get<std::vector<std::size_t>>(),
               j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kFormat, std::string("bad tensor record: ") + e.what());
  }
}

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_TENSOR_JSON_H_
