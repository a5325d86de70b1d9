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

#ifndef ULAB_SYNTH_H_
#define ULAB_SYNTH_H_

#include <cstddef>
#include <cstdint>

#include "ulab/model.h"
#include "ulab/rng.h"

namespace ulab {

// Procedural stand-in for a binary attribute-classification corpus. Token ids
// [c * pool, (c + 1) * pool) form the indicative pool of class c; the rest of
// the vocabulary is the common pool.
struct DataGenConfig {
  VocabSpec vocab = VocabSpec::Make(4096, 256, 16, 2);
  // Fraction of positions filled from the label's class pool.
  double class_signal = 0.5;
  std::uint32_t class_pool_size = 8;
  std::uint32_t train_size = 1000;
  std::uint32_t audit_size = 64;
  std::uint32_t aux_size = 4000;
  std::uint32_t holdout_size = 500;
  std::uint64_t seed = 0;

  void Validate() const;

  // ceil(class_signal * L)
  std::uint32_t SignalPositions() const;
  std::uint32_t CommonPoolBegin() const {
    return vocab.num_classes * class_pool_size;
  }
};

struct DataSplits {
  Dataset train;
  Dataset audit;
  Dataset aux;
  Dataset holdout;
};

// Splits are pairwise disjoint, label-balanced within +-1 and deterministic in
// config.seed.
DataSplits Generate(const DataGenConfig& config);

Example SampleExample(const DataGenConfig& config, std::uint32_t label,
                      Rng& rng);

// `count` fresh examples with balanced labels in shuffled order.
Dataset SampleExamples(const DataGenConfig& config, std::size_t count,
                       Rng& rng);

}  // namespace ulab

#endif  // ULAB_SYNTH_H_
