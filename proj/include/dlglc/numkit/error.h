// include/dlglc/numkit/error.h

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

#ifndef DLGLC_NUMKIT_ERROR_H_
#define DLGLC_NUMKIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dlglc {

enum class Errc {
  kEmptyInput,
  kNonPositiveTemperature,
  kZeroVector,
  kShapeMismatch,
  kStepOutOfRange,
  kNonFiniteLoss,
  kInvalidConfig,
  kEmptyCluster,
  kInvalidRate,
  kInsufficientIdentities,
  kBatchLargerThanPopulation,
  kNonDistribution,
  kEmptyBatch,
  kTooFewDistinctPoints,
  kNonPositiveVariance,
  kTooFewSamples,
  kDegenerateFit,
  kNoRootBetweenMeans,
  kDegenerateMeans,
  kInvalidLabel,
  kDegenerateTrials,
  kLengthMismatch,
  kUnknownUtterance,
  kMissingInput,
  kFormat,
};

std::string_view ErrcName(Errc code);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(ErrcName(code)) + ": " + what),
        code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void Fail(Errc code, const std::string &what) {
  throw Error(code, what);
}

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_ERROR_H_
