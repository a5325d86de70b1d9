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


#ifndef ULAB_EXPERIMENT_CONFIG_H_
#define ULAB_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ulab/attack_model.h"
#include "ulab/audit.h"
#include "ulab/dr.h"
#include "ulab/mi.h"
#include "ulab/synth.h"
#include "ulab/train.h"
#include "ulab/unlearn.h"

namespace ulab {

struct AuditCampaignConfig {
  std::vector<AuditMode> modes = {AuditMode::kULiraPlus, AuditMode::kULira};
  AuditConfig audit;
};

struct StrictMiCampaignConfig {
  std::uint32_t num_candidates = 32;  // half of them are unlearned members
  std::vector<ScoreKind> score_kinds = {ScoreKind::kConfidence,
                                        ScoreKind::kCrossEntropy,
                                        ScoreKind::kHingeLogit};
  // Candidates are mislabeled canaries rather than in-distribution samples.
  bool mislabel = true;
};

struct RelaxedMiCampaignConfig {
  std::uint32_t num_targets = 32;  // half of them are unlearned members
  std::vector<UnlearnMethod> methods = {UnlearnMethod::kRetrain};
  bool mislabel = true;
  double fpr = 0.1;
  RelaxedMiConfig mi;
};

struct DrCampaignConfig {
  std::uint32_t num_targets = 10;
  std::vector<UnlearnMethod> methods = {UnlearnMethod::kGa};
  std::uint32_t baseline_draws = 100;
  ReconConfig recon;
};

// One JSON document describing every campaign. Child seeds are not read from
// the document: each run derives them from master_seed as
// DeriveSeed(master_seed, component, repetition).
struct ExperimentConfig {
  DataGenConfig data;
  TrainConfig train;
  // One entry per unlearning method under study.
  std::vector<UnlearnConfig> unlearn;
  AuditCampaignConfig audit;
  StrictMiCampaignConfig strict_mi;
  RelaxedMiCampaignConfig relaxed_mi;
  DrCampaignConfig dr;
  std::uint32_t repetitions = 1;
  std::size_t threads = 1;
  std::string out_dir = "out";
  std::uint64_t master_seed = 0;

  ExperimentConfig();

  // Throws UsageError naming the first invalid field.
  void Validate() const;

  // The unlearning config for `method`: the matching entry of `unlearn`, or
  // the defaults with that method.
  UnlearnConfig UnlearnFor(UnlearnMethod method) const;
};

// Child seeds of one repetition.
struct SeedPlan {
  std::uint64_t data = 0;
  std::uint64_t embedding = 0;
  std::uint64_t train = 0;
  std::uint64_t unlearn = 0;
  std::uint64_t audit = 0;
  std::uint64_t strict_mi = 0;
  std::uint64_t relaxed_mi = 0;
  std::uint64_t dr = 0;
};

SeedPlan DeriveSeedPlan(std::uint64_t master_seed, std::uint32_t repetition);

nlohmann::json SeedPlanToJson(const SeedPlan& plan);

// JSON conversions. Missing keys keep their defaults; unknown keys and
// ill-typed values throw UsageError.
nlohmann::json VocabSpecToJson(const VocabSpec& spec);
VocabSpec VocabSpecFromJson(const nlohmann::json& j);
nlohmann::json DataGenConfigToJson(const DataGenConfig& config);
DataGenConfig DataGenConfigFromJson(const nlohmann::json& j);
nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);
nlohmann::json UnlearnConfigToJson(const UnlearnConfig& config);
UnlearnConfig UnlearnConfigFromJson(const nlohmann::json& j);
nlohmann::json AuditConfigToJson(const AuditConfig& config);
AuditConfig AuditConfigFromJson(const nlohmann::json& j);
nlohmann::json AttackModelConfigToJson(const AttackModelConfig& config);
AttackModelConfig AttackModelConfigFromJson(const nlohmann::json& j);
nlohmann::json RelaxedMiConfigToJson(const RelaxedMiConfig& config);
RelaxedMiConfig RelaxedMiConfigFromJson(const nlohmann::json& j);
nlohmann::json ReconConfigToJson(const ReconConfig& config);
ReconConfig ReconConfigFromJson(const nlohmann::json& j);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

// Reads and validates a config file. Throws UsageError naming the path when
// it is missing or malformed.
ExperimentConfig LoadExperimentConfig(const std::string& path);

}  // namespace ulab

#endif  // ULAB_EXPERIMENT_CONFIG_H_
