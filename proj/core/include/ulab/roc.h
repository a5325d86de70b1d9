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

#ifndef ULAB_ROC_H_
#define ULAB_ROC_H_

#include <cstdint>
#include <span>
#include <vector>

namespace ulab {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  // From (0, 0) to (1, 1); one point per distinct score, descending.
  std::vector<RocPoint> points;
  double auc = 0.0;

  // Highest TPR at the target FPR, linearly interpolated between adjacent
  // points.
  double TprAt(double fpr) const;
};

// Higher score means "member". mask[i] = 1 marks a positive. Tied scores are
// swept together, so a tie contributes half a pair to the AUC. Throws
// UsageError unless both classes are present and the sizes agree.
RocCurve ComputeRoc(std::span<const double> scores,
                    std::span<const std::uint8_t> mask);

}  // namespace ulab

#endif  // ULAB_ROC_H_
