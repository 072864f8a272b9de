// include/dlglc/numkit/rng.h

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

#ifndef DLGLC_NUMKIT_RNG_H_
#define DLGLC_NUMKIT_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace dlglc {

// Seeded random stream. The engine is the standard 64-bit Mersenne twister;
// the uniform/normal transforms are written out here so that sequences are
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer in [0, n).
  std::size_t Index(std::size_t n);
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> Permutation(std::size_t n);

  // Independent stream derived from this stream's seed and a tag. Does not
  // advance this stream.
  Rng Split(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer, used for seed derivation.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t tag);

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_RNG_H_
