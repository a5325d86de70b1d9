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

#ifndef ULAB_TRAIN_H_
#define ULAB_TRAIN_H_

#include <cstdint>
#include <span>
#include <string_view>

#include "ulab/model.h"

namespace ulab {

enum class OptimizerKind { kPlainGradient, kAdaptiveMoment };

std::string_view OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(std::string_view name);

// The learning algorithm A. Defaults were tuned so that a single mislabeled
// sample in a 1000-example training set leaves a measurable trace.
struct TrainConfig {
  double learning_rate = 0.3;
  std::uint32_t epochs = 100;
  OptimizerKind optimizer = OptimizerKind::kAdaptiveMoment;
  // Batches at least as large as the dataset mean full-batch training.
  std::uint32_t batch_size = 4096;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Minimizes mean cross-entropy over `data` starting from `init`. Only the
// head changes; the embedding table is shared with `init`. Deterministic in
// (config, data order, init). Throws NumericDivergenceError naming the epoch
// when the loss becomes non-finite.
ModelParams Train(const TrainConfig& config, std::span<const Example> data,
                  const ModelParams& init);

}  // namespace ulab

#endif  // ULAB_TRAIN_H_
