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

#ifndef ULAB_ATTACK_MODEL_H_
#define ULAB_ATTACK_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

namespace ulab {

struct AttackModelConfig {
  // Adds one tanh hidden layer of width hidden_units before the logistic
  // output.
  bool hidden_layer = false;
  std::uint32_t hidden_units = 16;
  double learning_rate = 0.01;
  std::uint32_t max_epochs = 500;
  // Stop after this many epochs without a lower validation loss.
  std::uint32_t patience = 25;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Binary classifier over fixed-length feature vectors. Inputs are
// standardized with statistics of the training split.
class AttackModel {
 public:
  // Trains with full-batch adaptive-moment updates on a per-class 80/20
  // split and keeps the weights with the lowest validation loss. Throws
  // UsageError when either class has fewer than two examples or the rows
  // differ in length.
  static AttackModel Fit(std::span<const std::vector<double>> features,
                         std::span<const std::uint8_t> labels,
                         const AttackModelConfig& config);

  // Probability of label 1, strictly inside (0, 1).
  double Predict(std::span<const double> feature) const;

  std::size_t input_dim() const { return mean_.size(); }
  std::uint32_t epochs_run() const { return epochs_run_; }
  double best_validation_loss() const { return best_validation_loss_; }

 private:
  double Logit(std::span<const double> standardized) const;

  AttackModelConfig config_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  // Logistic: k weights then bias. Hidden: H x k weights, H biases, H output
  // weights, output bias.
  std::vector<double> params_;
  std::uint32_t epochs_run_ = 0;
  double best_validation_loss_ = 0.0;
};

}  // namespace ulab

#endif  // ULAB_ATTACK_MODEL_H_
