// include/dlglc/pipeline/cli.h

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

#ifndef DLGLC_PIPELINE_CLI_H_
#define DLGLC_PIPELINE_CLI_H_

#include <iosfwd>

namespace dlglc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitFailure = 3;

// Subcommands gen-world, pretrain, iterate, run, eval and report.
int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace dlglc

#endif  // DLGLC_PIPELINE_CLI_H_
