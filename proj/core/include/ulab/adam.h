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

#ifndef ULAB_ADAM_H_
#define ULAB_ADAM_H_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ulab {

// Adaptive-moment update over a flat parameter vector.
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Adam(std::size_t size, double learning_rate)
      : learning_rate_(learning_rate), m_(size, 0.0), v_(size, 0.0) {}

  // params -= lr * mhat / (sqrt(vhat) + eps)
  void Step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    beta1_pow_ *= kBeta1;
    beta2_pow_ *= kBeta2;
    const double c1 = 1.0 - beta1_pow_;
    const double c2 = 1.0 - beta2_pow_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= learning_rate_ * mhat / (std::sqrt(vhat) + kEpsilon);
    }
  }

  long steps() const { return t_; }

 private:
  double learning_rate_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
};

}  // namespace ulab

#endif  // ULAB_ADAM_H_
