// wsed/rng.hpp

// Copyright 2026  The wsed authors

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

#ifndef WSED_RNG_HPP_
#define WSED_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace wsed {

// Deterministic random source.  The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; all distributions are implemented here
// by hand because the std:: distribution objects are implementation-defined
// and would break bit-reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi], both ends included.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via the Marsaglia polar method.
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape);

  // Beta(a, b) as Ga / (Ga + Gb); a, b > 0.
  double beta(double a, double b);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wsed

#endif  // WSED_RNG_HPP_
