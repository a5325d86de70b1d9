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

#ifndef ULAB_CHECKPOINT_H_
#define ULAB_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ulab/model.h"
#include "ulab/train.h"

namespace ulab {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 24;

// Binary layout, all little-endian:
//   "ULAB" | version u32 | |V| u32 | d u32 | L u32 | C u32
//   E (|V| x d f64, row-major) | W (C x d f64) | b (C f64) | seed u64
// Position weights are not stored; loaders rebuild the default weights.
std::string EncodeCheckpoint(const ModelParams& params);
ModelParams DecodeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelParams& params);
ModelParams LoadCheckpoint(const std::filesystem::path& path);

// JSON sidecar carrying the TrainConfig that produced a checkpoint.
void SaveTrainSidecar(const std::filesystem::path& path,
                      const TrainConfig& config);
TrainConfig LoadTrainSidecar(const std::filesystem::path& path);

}  // namespace ulab

#endif  // ULAB_CHECKPOINT_H_
