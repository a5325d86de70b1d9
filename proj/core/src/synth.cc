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

#include "ulab/synth.h"

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "ulab/errors.h"

namespace ulab {
namespace {

std::vector<std::uint32_t> BalancedLabels(std::size_t count,
                                          std::uint32_t classes, Rng& rng) {
  std::vector<std::uint32_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % classes);
  }
  rng.Shuffle(std::span<std::uint32_t>(labels));
  return labels;
}

Dataset SampleUnique(const DataGenConfig& config, std::size_t count, Rng& rng,
                     std::set<Example>& seen) {
  Dataset out;
  out.reserve(count);
  for (std::uint32_t label : BalancedLabels(count, config.vocab.num_classes,
                                            rng)) {
    Example ex = SampleExample(config, label, rng);
    while (!seen.insert(ex).second) ex = SampleExample(config, label, rng);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

void DataGenConfig::Validate() const {
  vocab.Validate();
  if (!(class_signal >= 0.0 && class_signal < 1.0)) {
    throw UsageError("class_signal must lie in [0, 1)");
  }
  if (class_pool_size == 0) throw UsageError("class pools must be nonempty");
  if (CommonPoolBegin() >= vocab.vocab_size) {
    throw UsageError("class pools leave no room for the common pool");
  }
  if (train_size == 0 || audit_size == 0 || aux_size == 0 ||
      holdout_size == 0) {
    throw UsageError("split sizes must be positive");
  }
}

std::uint32_t DataGenConfig::SignalPositions() const {
  return static_cast<std::uint32_t>(
      std::ceil(class_signal * static_cast<double>(vocab.seq_len) - 1e-12));
}

Example SampleExample(const DataGenConfig& config, std::uint32_t label,
                      Rng& rng) {
  const std::uint32_t len = config.vocab.seq_len;
  const std::uint32_t signal = config.SignalPositions();
  const std::uint32_t common_begin = config.CommonPoolBegin();
  const std::uint32_t common_size = config.vocab.vocab_size - common_begin;

  // Partial Fisher-Yates picks the signal positions uniformly.
  std::vector<std::uint32_t> positions(len);
  std::iota(positions.begin(), positions.end(), 0u);
  for (std::uint32_t i = 0; i < signal; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.Below(len - i));
    std::swap(positions[i], positions[j]);
  }
  Example ex;
  ex.label = label;
  ex.tokens.resize(len);
  std::vector<bool> is_signal(len, false);
  for (std::uint32_t i = 0; i < signal; ++i) is_signal[positions[i]] = true;
  for (std::uint32_t l = 0; l < len; ++l) {
    if (is_signal[l]) {
      ex.tokens[l] = label * config.class_pool_size +
                     static_cast<std::uint32_t>(
                         rng.Below(config.class_pool_size));
    } else {
      ex.tokens[l] =
          common_begin + static_cast<std::uint32_t>(rng.Below(common_size));
    }
  }
  return ex;
}

Dataset SampleExamples(const DataGenConfig& config, std::size_t count,
                       Rng& rng) {
  Dataset out;
  out.reserve(count);
  for (std::uint32_t label :
       BalancedLabels(count, config.vocab.num_classes, rng)) {
    out.push_back(SampleExample(config, label, rng));
  }
  return out;
}

DataSplits Generate(const DataGenConfig& config) {
  config.Validate();
  Rng rng(DeriveSeed(config.seed, "synth-data"));
  std::set<Example> seen;
  DataSplits splits;
  splits.train = SampleUnique(config, config.train_size, rng, seen);
  splits.audit = SampleUnique(config, config.audit_size, rng, seen);
  splits.aux = SampleUnique(config, config.aux_size, rng, seen);
  splits.holdout = SampleUnique(config, config.holdout_size, rng, seen);
  return splits;
}

}  // namespace ulab
