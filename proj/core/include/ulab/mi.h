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

#ifndef ULAB_MI_H_
#define ULAB_MI_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ulab/attack_model.h"
#include "ulab/audit.h"
#include "ulab/model.h"
#include "ulab/roc.h"
#include "ulab/train.h"
#include "ulab/unlearn.h"

namespace ulab {

// ---- Strict black-box attack: score differences only. ----

// Black-box access that reveals nothing but the score of an example.
using ScoreOracle = std::function<Score(const Example&, ScoreKind)>;
ScoreOracle ScoreBox(ModelParams model);

// |s_unlearned - s_original|. Throws UsageError if the kinds differ.
double StrictMiStatistic(const Score& original, const Score& unlearned);

// Ranks by statistic (descending; ties put non-members first) and returns the
// largest number of members in a prefix holding at most one non-member.
// Throws UsageError unless both classes are present.
std::size_t NtsAt1Nfs(std::span<const double> statistics,
                      std::span<const std::uint8_t> membership);

struct StrictMiReport {
  ScoreKind score_kind = ScoreKind::kCrossEntropy;
  std::vector<double> statistics;
  std::vector<std::uint8_t> membership;
  std::size_t nts_at_1nfs = 0;
  RocCurve roc;
};

StrictMiReport RunStrictMi(const ScoreOracle& original,
                           const ScoreOracle& unlearned,
                           std::span<const Example> candidates,
                           std::span<const std::uint8_t> membership,
                           ScoreKind kind);

// ---- Relaxed black-box attack: logits plus shadow models. ----

using LogitOracle = std::function<std::vector<double>(const Example&)>;
LogitOracle LogitBox(ModelParams model);

struct MiFeature {
  std::vector<double> l_ori;
  std::vector<double> l_ul;
  std::vector<double> l_diff;  // l_ori - l_ul
  std::uint8_t label = 0;      // 1 = unlearned member

  // [l_ori, l_ul, l_diff]
  std::vector<double> Flat() const;
};

// Throws UsageError when the logit vectors differ in length.
MiFeature BuildFeature(std::span<const double> l_ori,
                       std::span<const double> l_ul, std::uint8_t label);

// Shadow features of one target: in-world shadows trained with it and then
// unlearned it; out-world shadows never saw it and unlearned something else.
struct ShadowFeatureSet {
  std::vector<MiFeature> in;
  std::vector<MiFeature> out;
};

struct RelaxedMiConfig {
  std::uint32_t shadows = 16;  // T per world
  std::size_t shadow_train_size = 1000;
  AttackModelConfig attack;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Builds shadow features for a pool of targets. Shadow pair k splits the pool
// into a random half and its complement; each side is injected into a fresh
// draw of shadow_train_size auxiliary examples and trained. Targets inside a
// model are unlearned one at a time (in-world); targets outside it are scored
// after unlearning one random auxiliary example x' of that model
// (out-world). Every target gets exactly T features per world, and no target
// is ever in an out-world training set. A pool of one target is the plain
// per-target algorithm. Failed shadows are skipped and reported in
// diagnostics.
std::vector<ShadowFeatureSet> BuildShadowFeatures(
    std::span<const Example> targets, std::span<const Example> aux,
    const NamedUnlearner& unlearner, const TrainConfig& train,
    const ModelParams& init, const RelaxedMiConfig& config,
    std::size_t parallelism, std::vector<std::string>* diagnostics = nullptr);

struct TargetAttack {
  double p_member = 0.5;
  // LiRA on the hinge-logit of l_ul with the same shadows.
  double lira_p_member = 0.5;
  double lira_log_ratio = 0.0;
  bool attack_failed = false;
  std::vector<std::string> diagnostics;
};

// Trains the attack model on the shadow features and applies it to the
// target's black-box feature. An attack-model failure yields p_member = 0.5
// with a diagnostic.
TargetAttack AttackTarget(const Example& target, const MiFeature& observed,
                          const ShadowFeatureSet& shadows,
                          const AttackModelConfig& config);

// Gaussian likelihood ratio on hinge-logit(l_ul) at the target's label.
LiraPosterior LiraMiBaseline(const Example& target, const MiFeature& observed,
                             const ShadowFeatureSet& shadows);

// Full relaxed attack on one target against black-box original/unlearned
// models.
TargetAttack RunRelaxedMi(const Example& target, const LogitOracle& original,
                          const LogitOracle& unlearned,
                          std::span<const Example> aux,
                          const NamedUnlearner& unlearner,
                          const TrainConfig& train, const ModelParams& init,
                          const RelaxedMiConfig& config,
                          std::size_t parallelism = 1);

}  // namespace ulab

#endif  // ULAB_MI_H_
