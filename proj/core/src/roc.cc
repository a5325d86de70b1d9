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

#include "ulab/roc.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ulab/errors.h"

namespace ulab {

double RocCurve::TprAt(double fpr) const {
  double best = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const RocPoint& p = points[k];
    if (p.fpr <= fpr) {
      best = std::max(best, p.tpr);
      continue;
    }
    if (k > 0) {
      const RocPoint& q = points[k - 1];
      const double t = (fpr - q.fpr) / (p.fpr - q.fpr);
      best = std::max(best, q.tpr + t * (p.tpr - q.tpr));
    }
    break;
  }
  return best;
}

RocCurve ComputeRoc(std::span<const double> scores,
                    std::span<const std::uint8_t> mask) {
  if (scores.size() != mask.size()) {
    throw UsageError("scores and mask differ in length");
  }
  if (scores.size() < 2) throw UsageError("ROC needs at least two samples");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] > 1) throw UsageError("mask entries must be 0 or 1");
    if (!std::isfinite(scores[i])) throw UsageError("non-finite score");
    pos += mask[i];
  }
  const std::size_t neg = mask.size() - pos;
  if (pos == 0 || neg == 0) {
    throw UsageError("ROC needs both positive and negative samples");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  // Trapezoid area is accumulated in integer units of 1 / (2 * pos * neg) so
  // the AUC is exact.
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t twice_area = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    const std::uint64_t tp0 = tp;
    const std::uint64_t fp0 = fp;
    while (k < order.size() && scores[order[k]] == threshold) {
      (mask[order[k]] ? tp : fp) += 1;
      ++k;
    }
    twice_area += (fp - fp0) * (tp0 + tp);
    roc.points.push_back({static_cast<double>(fp) / neg,
                          static_cast<double>(tp) / pos});
  }
  roc.auc = static_cast<double>(twice_area) / (2.0 * pos * neg);
  return roc;
}

}  // namespace ulab
