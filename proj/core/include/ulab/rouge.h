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

#ifndef ULAB_ROUGE_H_
#define ULAB_ROUGE_H_

#include <cstdint>
#include <span>
#include <string_view>

namespace ulab {

enum class RougeVariant { kRouge1, kRouge2, kRougeL };

std::string_view RougeVariantName(RougeVariant variant);

// F1 ROUGE on token ids, scaled to [0, 100]. N-gram counts are clipped to the
// reference multiplicity; ROUGE-L uses the longest common subsequence. When
// neither sequence has a bigram, ROUGE-2 is 100 for equal sequences and 0
// otherwise. Throws UsageError on an empty sequence.
double Rouge(std::span<const std::uint32_t> reference,
             std::span<const std::uint32_t> hypothesis, RougeVariant variant);

std::size_t LongestCommonSubsequence(std::span<const std::uint32_t> a,
                                     std::span<const std::uint32_t> b);

}  // namespace ulab

#endif  // ULAB_ROUGE_H_
