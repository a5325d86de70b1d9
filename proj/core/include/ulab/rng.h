// Copyright 2026 The ulab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ULAB_RNG_H_
#define ULAB_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace ulab {

// Seeded generator with platform-independent derived distributions. The
// standard library's distribution objects are implementation-defined, so
// uniform/normal/below are computed here from the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal via Box-Muller.
  double Normal();
  double Normal(double mean, double stddev) {
    return mean + stddev * Normal();
  }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t SplitMix64(std::uint64_t x);

// seed_child = hash(master, component, index). Stable across platforms and
// releases; every child seed in an experiment is derived through this.
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view component,
                         std::uint64_t index = 0);

}  // namespace ulab

#endif  // ULAB_RNG_H_
