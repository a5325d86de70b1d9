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

#include "ulab/rouge.h"

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "ulab/errors.h"

namespace ulab {
namespace {

using Gram = std::pair<std::uint32_t, std::uint32_t>;

std::map<Gram, std::size_t> CountGrams(std::span<const std::uint32_t> s,
                                       std::size_t n) {
  std::map<Gram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[{s[i], n == 2 ? s[i + 1] : 0u}];
  }
  return counts;
}

double F1(std::size_t overlap, std::size_t ref_total, std::size_t hyp_total) {
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / hyp_total;
  const double r = static_cast<double>(overlap) / ref_total;
  return 100.0 * 2.0 * p * r / (p + r);
}

}  // namespace

std::string_view RougeVariantName(RougeVariant variant) {
  switch (variant) {
    case RougeVariant::kRouge1:
      return "rouge-1";
    case RougeVariant::kRouge2:
      return "rouge-2";
    case RougeVariant::kRougeL:
      return "rouge-l";
  }
  return "unknown";
}

std::size_t LongestCommonSubsequence(std::span<const std::uint32_t> a,
                                     std::span<const std::uint32_t> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double Rouge(std::span<const std::uint32_t> reference,
             std::span<const std::uint32_t> hypothesis, RougeVariant variant) {
  if (reference.empty() || hypothesis.empty()) {
    throw UsageError("ROUGE needs nonempty sequences");
  }
  if (variant == RougeVariant::kRougeL) {
    return F1(LongestCommonSubsequence(reference, hypothesis),
              reference.size(), hypothesis.size());
  }
  const std::size_t n = variant == RougeVariant::kRouge1 ? 1 : 2;
  if (reference.size() < n || hypothesis.size() < n) {
    return std::ranges::equal(reference, hypothesis) ? 100.0 : 0.0;
  }
  const auto ref = CountGrams(reference, n);
  const auto hyp = CountGrams(hypothesis, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return F1(overlap, reference.size() - n + 1, hypothesis.size() - n + 1);
}

}  // namespace ulab
