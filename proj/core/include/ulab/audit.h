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

#ifndef ULAB_AUDIT_H_
#define ULAB_AUDIT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ulab/model.h"
#include "ulab/roc.h"
#include "ulab/synth.h"
#include "ulab/train.h"
#include "ulab/unlearn.h"

namespace ulab {

// Mislabeled canaries (U-LiRA+) or in-distribution audited samples (U-LiRA).
enum class AuditMode { kULiraPlus, kULira };

std::string_view AuditModeName(AuditMode mode);
AuditMode ParseAuditMode(std::string_view name);

struct AuditConfig {
  std::uint32_t num_audited = 32;  // N, even
  std::uint32_t shadows = 16;      // T per hypothesis
  std::vector<double> fpr_grid = {0.001, 0.01, 0.03};
  AuditMode mode = AuditMode::kULiraPlus;
  ScoreKind score_kind = ScoreKind::kHingeLogit;
  std::uint64_t seed = 0;

  void Validate() const;
};

inline constexpr double kSigmaFloor = 1e-6;

struct GaussianFit {
  double mean = 0.0;
  double stddev = kSigmaFloor;
};

struct GaussianPair {
  double mu_in = 0.0;
  double sigma_in = 1.0;
  double mu_out = 0.0;
  double sigma_out = 1.0;
};

struct LiraPosterior {
  double p_member = 0.5;
  // log N(o; in) - log N(o; out); monotone in p_member and free of
  // saturation, so it is the statistic swept by ROC curves.
  double log_ratio = 0.0;
  // Both densities underflowed; p_member was set to 1/2.
  bool uninformative = false;
};

// Flips a binary label. Throws UnsupportedError when num_classes != 2.
Example Mislabel(const Example& example, std::uint32_t num_classes = 2);

// Balanced membership mask: exactly n/2 ones, deterministic in seed.
std::vector<std::uint8_t> BuildMask(std::size_t n, std::uint64_t seed);

// Sample mean and unbiased standard deviation floored at kSigmaFloor.
GaussianFit FitGaussian(std::span<const double> scores);

// N(o; in) / (N(o; in) + N(o; out)).
LiraPosterior ComputeLiraPosterior(double observed, const GaussianPair& g);

// How the auditor draws data and trains models.
struct AuditPipeline {
  DataGenConfig data;
  TrainConfig train;
  std::uint64_t embedding_seed = 0;
  std::size_t parallelism = 1;
};

struct AuditReport {
  std::string method;
  AuditConfig config;
  std::vector<std::uint8_t> mask;
  // Per audited sample, on the unlearned test model.
  std::vector<double> p_member;
  std::vector<double> log_ratio;
  std::vector<double> target_score;
  RocCurve roc;
  std::vector<double> tpr_at_fpr;  // aligned with config.fpr_grid
  double binarized_accuracy = 0.0;
  // The same test run against the test model before unlearning, with
  // shadow originals as the in-hypothesis.
  std::vector<double> original_log_ratio;
  std::vector<double> original_target_score;
  RocCurve original_roc;
  std::vector<double> original_tpr_at_fpr;
  std::size_t failed_shadows = 0;
  std::vector<std::string> diagnostics;
};

// U-LiRA+ (or U-LiRA) for several unlearning algorithms at once. Runs 2T
// shadow models in complementary pairs: each injects a balanced half of the
// audited set into a fresh dataset and unlearns it, so every audited sample is
// in exactly T shadows and out of T. The audited set, test training set and
// shadow originals/retrains do not depend on U and are shared; every report is
// identical to what a single-method run with the same config would produce.
std::vector<AuditReport> RunAudits(const AuditConfig& config,
                                   std::span<const NamedUnlearner> unlearners,
                                   const AuditPipeline& pipeline);

AuditReport RunAudit(const AuditConfig& config, const NamedUnlearner& unlearner,
                     const AuditPipeline& pipeline);

}  // namespace ulab

#endif  // ULAB_AUDIT_H_
