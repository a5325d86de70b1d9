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

#ifndef ULAB_UNLEARN_H_
#define ULAB_UNLEARN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "ulab/model.h"
#include "ulab/train.h"

namespace ulab {

enum class UnlearnMethod { kRetrain, kGa, kKl, kNpo, kTaskVec };

inline constexpr std::array<UnlearnMethod, 5> kAllUnlearnMethods = {
    UnlearnMethod::kRetrain, UnlearnMethod::kGa, UnlearnMethod::kKl,
    UnlearnMethod::kNpo, UnlearnMethod::kTaskVec};

// "retrain" | "ga" | "kl" | "npo" | "taskvec"
std::string_view UnlearnMethodName(UnlearnMethod method);
UnlearnMethod ParseUnlearnMethod(std::string_view name);
// Display name used in report tables: Retrain, GA, KL, NPO, TaskVec.
std::string_view UnlearnMethodLabel(UnlearnMethod method);

struct UnlearnConfig {
  UnlearnMethod method = UnlearnMethod::kGa;
  std::uint32_t steps = 20;
  double learning_rate = 0.02;
  double npo_beta = 1.0;
  double taskvec_lambda = 1.0;
  double retain_weight = 0.0;
  std::uint64_t seed = 0;

  // Rejects steps > 1e4 and negative or non-finite hyperparameters. A zero
  // learning rate is allowed and yields the identity.
  void Validate() const;
};

struct UnlearnResult {
  ModelParams params;
  // Set when the forget-set loss exceeded kDivergenceLoss or became
  // non-finite; params then hold the last finite iterate.
  bool diverged = false;
  std::uint32_t steps_run = 0;
};

inline constexpr double kDivergenceLoss = 1e3;

// Exact unlearning: A(D \ D_unlearn) from the original init.
ModelParams Retrain(std::span<const Example> remaining,
                    const TrainConfig& config, const ModelParams& init);

// All forget-set objectives below are sums over D_unlearn rather than means,
// so a deleted example gets the same update whether it is removed alone or in
// a batch.

// theta <- theta + lr * grad sum CE(D_unlearn), `steps` times.
UnlearnResult GaUnlearn(const ModelParams& original,
                        std::span<const Example> forget,
                        const UnlearnConfig& config);

// Descends -sum KL(p_original || p_theta) over D_unlearn plus
// retain_weight * CE(D_retain). The KL term has zero gradient at the original
// weights, so the first update is a gradient-ascent step on D_unlearn.
UnlearnResult KlUnlearn(const ModelParams& original,
                        std::span<const Example> forget,
                        std::span<const Example> retain,
                        const UnlearnConfig& config);

// Descends sum (2/beta) log(1 + r^beta), r = p_theta(y|x) / p_orig(y|x).
UnlearnResult NpoUnlearn(const ModelParams& original,
                         std::span<const Example> forget,
                         const UnlearnConfig& config);

// Fine-tunes on D_unlearn for `steps` plain-gradient steps and negates the
// resulting task vector: theta_orig - lambda * (theta_ft - theta_orig).
UnlearnResult TaskVecUnlearn(const ModelParams& original,
                             std::span<const Example> forget,
                             const UnlearnConfig& config);

// Objectives, exposed for testing.
double NegKlLoss(const ModelParams& params, const ModelParams& reference,
                 std::span<const Example> forget);
Head NegKlGradient(const ModelParams& params, const ModelParams& reference,
                   std::span<const Example> forget);
double NpoLoss(const ModelParams& params, const ModelParams& reference,
               std::span<const Example> forget, double beta);
Head NpoGradient(const ModelParams& params, const ModelParams& reference,
                 std::span<const Example> forget, double beta);
// Mean KL(p_reference || p_params) over the examples.
double MeanKl(const ModelParams& reference, const ModelParams& params,
              std::span<const Example> examples);

// What a pipeline knows about the training run being unlearned.
struct UnlearnContext {
  std::span<const Example> remaining;  // D \ D_unlearn
  const TrainConfig* train_config = nullptr;
  const ModelParams* init = nullptr;
};

using Unlearner = std::function<UnlearnResult(
    const ModelParams& original, std::span<const Example> forget,
    const UnlearnContext& context)>;

// Dispatches on config.method. Retrain requires context.train_config and
// context.init.
UnlearnResult Unlearn(const UnlearnConfig& config, const ModelParams& original,
                      std::span<const Example> forget,
                      const UnlearnContext& context);

struct NamedUnlearner {
  std::string name;
  Unlearner run;
  // Exact retraining on the context; pipelines may reuse an already trained
  // A(D \ D_unlearn) instead of calling `run`.
  bool is_retrain = false;
};

NamedUnlearner MakeUnlearner(const UnlearnConfig& config);
// Returns the original model unchanged.
NamedUnlearner IdentityUnlearner();

}  // namespace ulab

#endif  // ULAB_UNLEARN_H_
