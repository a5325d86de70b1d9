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

#include <filesystem>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "ulab/errors.h"
#include "ulab/experiment_config.h"
#include "ulab/io.h"

namespace ulab {
namespace {

using nlohmann::json;

ExperimentConfig NonDefault() {
  ExperimentConfig c;
  c.data.vocab = VocabSpec::Make(64, 16, 8);
  c.data.train_size = 300;
  c.data.class_signal = 0.25;
  c.train.learning_rate = 0.1;
  c.train.optimizer = OptimizerKind::kPlainGradient;
  c.unlearn[1].learning_rate = 0.07;
  c.unlearn[3].npo_beta = 0.5;
  c.audit.modes = {AuditMode::kULira};
  c.audit.audit.fpr_grid = {0.05};
  c.audit.audit.score_kind = ScoreKind::kCrossEntropy;
  c.strict_mi.num_candidates = 12;
  c.strict_mi.mislabel = false;
  c.relaxed_mi.methods = {UnlearnMethod::kGa, UnlearnMethod::kNpo};
  c.relaxed_mi.mi.attack.hidden_layer = true;
  c.dr.recon.beam_width = 7;
  c.dr.recon.batch_size = 2;
  c.dr.num_targets = 4;
  c.repetitions = 3;
  c.threads = 5;
  c.master_seed = 1234567890123ull;
  return c;
}

TEST(ExperimentConfigTest, DefaultsValidate) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.unlearn.size(), kAllUnlearnMethods.size());
}

TEST(ExperimentConfigTest, JsonRoundTrip) {
  const ExperimentConfig c = NonDefault();
  const json j = ExperimentConfigToJson(c);
  const ExperimentConfig back = ExperimentConfigFromJson(j);
  EXPECT_EQ(ExperimentConfigToJson(back), j);
  EXPECT_EQ(back.data.vocab, c.data.vocab);
  EXPECT_EQ(back.unlearn[3].npo_beta, 0.5);
  EXPECT_EQ(back.master_seed, c.master_seed);
  EXPECT_EQ(back.relaxed_mi.methods, c.relaxed_mi.methods);
}

TEST(ExperimentConfigTest, MissingKeysKeepDefaults) {
  const ExperimentConfig c =
      ExperimentConfigFromJson(json::parse(R"({"train": {"epochs": 7}})"));
  EXPECT_EQ(c.train.epochs, 7u);
  EXPECT_EQ(c.train.learning_rate, TrainConfig{}.learning_rate);
  EXPECT_EQ(c.data.vocab, DataGenConfig{}.vocab);
}

TEST(ExperimentConfigTest, RejectsUnknownKeysAndBadTypes) {
  for (const char* text : {
           R"({"trian": {}})",
           R"({"train": {"epoch": 3}})",
           R"({"train": {"epochs": "3"}})",
           R"({"train": {"epochs": -3}})",
           R"({"data": {"vocab": {"size": 1.5}}})",
           R"({"unlearn": [{"method": "forget"}]})",
           R"({"audit": {"modes": ["lira"]}})",
       }) {
    EXPECT_THROW(ExperimentConfigFromJson(json::parse(text)), UsageError)
        << text;
  }
}

TEST(ExperimentConfigTest, ErrorsNameThePath) {
  try {
    ExperimentConfigFromJson(json::parse(R"({"dr": {"recon": {"alpah": 1}}})"));
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("alpah"), std::string::npos);
  }
}

TEST(ExperimentConfigTest, ValidateCatchesInconsistencies) {
  ExperimentConfig c;
  c.unlearn.push_back(c.unlearn[0]);
  EXPECT_THROW(c.Validate(), UsageError);
  c = ExperimentConfig{};
  c.dr.methods = {UnlearnMethod::kRetrain};
  EXPECT_THROW(c.Validate(), UsageError);
  c = ExperimentConfig{};
  c.dr.recon.batch_size = 3;
  EXPECT_THROW(c.Validate(), UsageError);
  c = ExperimentConfig{};
  c.strict_mi.num_candidates = 7;
  EXPECT_THROW(c.Validate(), UsageError);
}

TEST(ExperimentConfigTest, UnlearnForFallsBackToDefaults) {
  ExperimentConfig c;
  c.unlearn = {UnlearnConfig{}};
  c.unlearn[0].learning_rate = 0.5;
  EXPECT_EQ(c.UnlearnFor(UnlearnMethod::kGa).learning_rate, 0.5);
  EXPECT_EQ(c.UnlearnFor(UnlearnMethod::kNpo).method, UnlearnMethod::kNpo);
  EXPECT_EQ(c.UnlearnFor(UnlearnMethod::kNpo).learning_rate,
            UnlearnConfig{}.learning_rate);
}

TEST(ExperimentConfigTest, LoadReportsMissingPath) {
  try {
    LoadExperimentConfig("/nonexistent/ulab/config.json");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/ulab/config.json"),
              std::string::npos);
  }
}

TEST(ExperimentConfigTest, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() /
                    "ulab_config_test.json";
  WriteFileAtomic(path, ExperimentConfigToJson(NonDefault()).dump(2));
  EXPECT_EQ(ExperimentConfigToJson(LoadExperimentConfig(path.string())),
            ExperimentConfigToJson(NonDefault()));
  WriteFileAtomic(path, "{ not json");
  EXPECT_THROW(LoadExperimentConfig(path.string()), UsageError);
  std::filesystem::remove(path);
}

TEST(SeedPlanTest, DistinctAndStable) {
  const SeedPlan a = DeriveSeedPlan(7, 0);
  const SeedPlan b = DeriveSeedPlan(7, 0);
  EXPECT_EQ(SeedPlanToJson(a), SeedPlanToJson(b));
  const std::set<std::uint64_t> seeds = {a.data,  a.embedding,  a.train,
                                         a.unlearn, a.audit,    a.strict_mi,
                                         a.relaxed_mi, a.dr};
  EXPECT_EQ(seeds.size(), 8u);
  EXPECT_NE(DeriveSeedPlan(7, 1).data, a.data);
  EXPECT_NE(DeriveSeedPlan(8, 0).data, a.data);
}

}  // namespace
}  // namespace ulab
