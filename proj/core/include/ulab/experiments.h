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


#ifndef ULAB_EXPERIMENTS_H_
#define ULAB_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulab/audit.h"
#include "ulab/dr.h"
#include "ulab/experiment_config.h"
#include "ulab/mi.h"

namespace ulab {

// Campaigns run `repetitions` independent worlds. Repetition r draws data,
// embeddings and every child seed from DeriveSeedPlan(master_seed, r), so
// results depend only on (config, master seed) and never on the thread
// count. A job that fails is recorded in `failures` and the campaign moves
// on.

struct AuditRun {
  std::uint32_t repetition = 0;
  AuditMode mode = AuditMode::kULiraPlus;
  AuditReport report;
};

struct AuditCampaignResult {
  std::vector<UnlearnMethod> methods;
  std::vector<AuditRun> runs;
  std::vector<std::string> failures;
};

// U-LiRA+ and/or U-LiRA over `methods` (all configured methods when empty).
AuditCampaignResult RunAuditCampaign(const ExperimentConfig& config,
                                     std::span<const UnlearnMethod> methods);

struct StrictMiRun {
  std::uint32_t repetition = 0;
  UnlearnMethod method = UnlearnMethod::kRetrain;
  StrictMiReport report;
};

struct StrictMiCampaignResult {
  std::vector<UnlearnMethod> methods;
  std::vector<ScoreKind> score_kinds;
  std::vector<StrictMiRun> runs;
  std::vector<std::string> failures;
};

// The target model is trained with half of the candidates injected, which it
// then unlearns as one batch.
StrictMiCampaignResult RunStrictMiCampaign(
    const ExperimentConfig& config, std::span<const UnlearnMethod> methods);

struct RelaxedMiTarget {
  std::uint32_t repetition = 0;
  UnlearnMethod method = UnlearnMethod::kRetrain;
  std::uint32_t index = 0;
  bool member = false;
  double p_member = 0.5;
  double lira_p_member = 0.5;
  double lira_log_ratio = 0.0;
  bool attack_failed = false;
};

struct RelaxedMiRun {
  std::uint32_t repetition = 0;
  UnlearnMethod method = UnlearnMethod::kRetrain;
  double tula_tpr = 0.0;  // at config.relaxed_mi.fpr
  double tula_auc = 0.5;
  double lira_tpr = 0.0;
  double lira_auc = 0.5;
};

struct RelaxedMiCampaignResult {
  std::vector<UnlearnMethod> methods;
  double fpr = 0.1;
  std::vector<RelaxedMiTarget> targets;
  std::vector<RelaxedMiRun> runs;
  std::vector<std::string> failures;
};

// The target model is trained with half of the targets injected. Each
// member target is unlearned on its own; each non-member is observed on a
// model that unlearned one random training example instead.
RelaxedMiCampaignResult RunRelaxedMiCampaign(
    const ExperimentConfig& config, std::span<const UnlearnMethod> methods);

struct DrTarget {
  std::uint32_t repetition = 0;
  UnlearnMethod method = UnlearnMethod::kGa;
  std::uint32_t group = 0;
  std::vector<Example> truth;
  std::vector<DecodedText> decoded;  // aligned with truth
  RougeTriple rouge;
  RougeTriple baseline;
  double label_accuracy = 0.0;
  double rec_loss = 1.0;
  std::uint32_t best_restart = 0;
  bool no_signal = false;
};

struct DrCampaignResult {
  std::vector<UnlearnMethod> methods;
  std::vector<DrTarget> targets;
  std::vector<std::string> failures;
};

// Trains on the training split, unlearns groups of recon.batch_size training
// examples one group at a time and reconstructs each group from the weight
// difference.
DrCampaignResult RunDrCampaign(const ExperimentConfig& config,
                               std::span<const UnlearnMethod> methods);

struct ExperimentResults {
  ExperimentConfig config;
  std::optional<AuditCampaignResult> audit;
  std::optional<StrictMiCampaignResult> strict_mi;
  std::optional<RelaxedMiCampaignResult> relaxed_mi;
  std::optional<DrCampaignResult> dr;
};

}  // namespace ulab

#endif  // ULAB_EXPERIMENTS_H_
