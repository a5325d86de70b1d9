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

#ifndef ULAB_DATASET_IO_H_
#define ULAB_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "ulab/model.h"

namespace ulab {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

struct DatasetHeader {
  VocabSpec vocab;
  std::uint64_t seed = 0;
  std::string split;
  std::uint32_t version = kDatasetFormatVersion;
};

struct DatasetFile {
  DatasetHeader header;
  Dataset examples;
};

// JSON Lines: the first line is the header
//   {"seed": ..., "split": ..., "version": 1, "vocab": {...}}
// and each following line one record {"label": y, "tokens": [...]}.
std::string EncodeDataset(const DatasetHeader& header,
                          std::span<const Example> examples);

// Throws ParseError (with line number) on malformed lines and
// ValidationError when a record does not fit the header's vocabulary.
DatasetFile DecodeDataset(std::string_view text);

void SaveDataset(const std::filesystem::path& path,
                 const DatasetHeader& header,
                 std::span<const Example> examples);

// When `expected` is given, a header vocabulary that differs from it in
// size, dimension, length or class count is a ValidationError.
DatasetFile LoadDataset(const std::filesystem::path& path,
                        const VocabSpec* expected = nullptr);

}  // namespace ulab

#endif  // ULAB_DATASET_IO_H_
