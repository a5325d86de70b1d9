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

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "ulab/attack_model.h"
#include "ulab/audit.h"
#include "ulab/errors.h"
#include "ulab/mi.h"
#include "ulab/rng.h"
#include "ulab/synth.h"
#include "ulab/train.h"
#include "ulab/unlearn.h"

namespace ulab {
namespace {

TEST(StrictStatisticTest, Examples) {
  const Score a{ScoreKind::kCrossEntropy, 0.2};
  const Score b{ScoreKind::kCrossEntropy, 1.7};
  EXPECT_DOUBLE_EQ(StrictMiStatistic(a, a), 0.0);
  EXPECT_DOUBLE_EQ(StrictMiStatistic(a, b), 1.5);
  EXPECT_DOUBLE_EQ(StrictMiStatistic(b, a), 1.5);
  EXPECT_THROW(StrictMiStatistic(a, Score{ScoreKind::kConfidence, 0.2}),
               UsageError);
}

// A default-scale world with a batch of mislabeled canaries, half of them
// trained on.
struct CanaryWorld {
  DataSplits splits;
  TrainConfig train;
  ModelParams init;
  Dataset candidates;
  std::vector<std::uint8_t> mask;
  Dataset injected;
  ModelParams original;
};

CanaryWorld MakeCanaryWorld(std::uint64_t seed, std::size_t n) {
  CanaryWorld w;
  DataGenConfig g;
  g.seed = seed;
  w.splits = Generate(g);
  Rng rng(DeriveSeed(seed, "canaries"));
  w.candidates = SampleExamples(g, n, rng);
  for (Example& ex : w.candidates) ex = Mislabel(ex);
  w.mask = BuildMask(n, seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (w.mask[i]) w.injected.push_back(w.candidates[i]);
  }
  Dataset full = w.splits.train;
  full.insert(full.end(), w.injected.begin(), w.injected.end());
  w.train.seed = seed;
  w.init = InitModel(g.vocab, seed + 77);
  w.original = Train(w.train, full, w.init);
  return w;
}

TEST(StrictMiTest, NoChangeMeansNoSignal) {
  const CanaryWorld w = MakeCanaryWorld(1, 8);
  const StrictMiReport r =
      RunStrictMi(ScoreBox(w.original), ScoreBox(w.original), w.candidates,
                  w.mask, ScoreKind::kCrossEntropy);
  for (double s : r.statistics) EXPECT_EQ(s, 0.0);
  EXPECT_LE(r.nts_at_1nfs, 1u);
}

TEST(StrictMiTest, RetrainMovesUnlearnedCanariesMore) {
  int wins = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const CanaryWorld w = MakeCanaryWorld(100 + t, 2);
    const std::size_t member = w.mask[0] ? 0 : 1;
    const ModelParams ul = Retrain(w.splits.train, w.train, w.init);
    const StrictMiReport r =
        RunStrictMi(ScoreBox(w.original), ScoreBox(ul), w.candidates, w.mask,
                    ScoreKind::kCrossEntropy);
    wins += r.statistics[member] > r.statistics[1 - member];
  }
  EXPECT_GE(wins, 8);
}

TEST(MiFeatureTest, Examples) {
  const MiFeature f = BuildFeature(std::vector<double>{2.0, 0.0},
                                   std::vector<double>{1.0, 1.0}, 1);
  EXPECT_EQ(f.Flat(), (std::vector<double>{2, 0, 1, 1, 1, -1}));
  EXPECT_EQ(f.label, 1);
  const MiFeature same = BuildFeature(std::vector<double>{0.3, -2.0},
                                      std::vector<double>{0.3, -2.0}, 0);
  EXPECT_EQ(same.l_diff, (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(BuildFeature(std::vector<double>{1.0},
                            std::vector<double>{1.0, 2.0}, 0),
               UsageError);
}

TEST(AttackModelTest, SeparatesGaussianClouds) {
  Rng rng(3);
  std::vector<std::vector<double>> xs;
  std::vector<std::uint8_t> ys;
  for (int i = 0; i < 64; ++i) {
    const std::uint8_t y = i % 2;
    xs.push_back({rng.Normal(y ? 2.0 : -2.0, 1.0), rng.Normal()});
    ys.push_back(y);
  }
  for (bool hidden : {false, true}) {
    AttackModelConfig c;
    c.hidden_layer = hidden;
    const AttackModel m = AttackModel::Fit(xs, ys, c);
    EXPECT_EQ(m.input_dim(), 2u);
    EXPECT_GT(m.Predict(std::vector<double>{3.0, 0.0}), 0.9);
    EXPECT_LT(m.Predict(std::vector<double>{-3.0, 0.0}), 0.1);
    const double far = m.Predict(std::vector<double>{1e6, 0.0});
    EXPECT_GT(far, 0.0);
    EXPECT_LT(far, 1.0);
  }
}

TEST(AttackModelTest, RejectsTinyClasses) {
  std::vector<std::vector<double>> xs = {{1.0}, {2.0}, {3.0}};
  std::vector<std::uint8_t> ys = {1, 0, 0};
  EXPECT_THROW(AttackModel::Fit(xs, ys, AttackModelConfig{}), UsageError);
}

TEST(RelaxedMiTest, IdenticalWorldsGiveChance) {
  ShadowFeatureSet s;
  Rng rng(4);
  for (int i = 0; i < 16; ++i) {
    std::vector<double> a = {rng.Normal(), rng.Normal()};
    std::vector<double> b = {rng.Normal(), rng.Normal()};
    s.in.push_back(BuildFeature(a, b, 1));
    s.out.push_back(BuildFeature(a, b, 0));
  }
  const Example target{{0}, 0};
  const TargetAttack r =
      AttackTarget(target, s.in[3], s, AttackModelConfig{});
  EXPECT_NEAR(r.p_member, 0.5, 0.1);
  EXPECT_NEAR(r.lira_p_member, 0.5, 1e-12);
}

TEST(RelaxedMiTest, ConfigValidation) {
  RelaxedMiConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.shadows = 4;
  EXPECT_THROW(c.Validate(), UsageError);
}

TEST(RelaxedMiTest, ShadowPoolsHaveTPerWorld) {
  DataGenConfig g;
  g.vocab = VocabSpec::Make(256, 32, 8);
  g.train_size = 100;
  g.aux_size = 400;
  const DataSplits d = Generate(g);
  Dataset targets(d.holdout.begin(), d.holdout.begin() + 6);
  RelaxedMiConfig c;
  c.shadows = 8;
  c.shadow_train_size = 100;
  UnlearnConfig uc;
  std::vector<std::string> notes;
  const auto sets = BuildShadowFeatures(targets, d.aux, MakeUnlearner(uc),
                                        TrainConfig{}, InitModel(g.vocab, 1),
                                        c, 2, &notes);
  ASSERT_EQ(sets.size(), targets.size());
  for (const ShadowFeatureSet& s : sets) {
    EXPECT_EQ(s.in.size(), 8u);
    EXPECT_EQ(s.out.size(), 8u);
    for (const MiFeature& f : s.in) EXPECT_EQ(f.label, 1);
    for (const MiFeature& f : s.out) EXPECT_EQ(f.label, 0);
  }
  EXPECT_TRUE(notes.empty());
  const auto again = BuildShadowFeatures(targets, d.aux, MakeUnlearner(uc),
                                         TrainConfig{}, InitModel(g.vocab, 1),
                                         c, 1);
  EXPECT_EQ(again[2].in[5].l_ul, sets[2].in[5].l_ul);
}

TEST(RelaxedMiTest, RetrainedCanaryIsRecognized) {
  int hits = 0;
  const int trials = 5;
  UnlearnConfig uc;
  uc.method = UnlearnMethod::kRetrain;
  const NamedUnlearner retrain = MakeUnlearner(uc);
  for (int t = 0; t < trials; ++t) {
    const CanaryWorld w = MakeCanaryWorld(200 + t, 2);
    const std::size_t member = w.mask[0] ? 0 : 1;
    const ModelParams ul = Train(w.train, w.splits.train, w.init);
    RelaxedMiConfig c;
    c.seed = t;
    const TargetAttack a =
        RunRelaxedMi(w.candidates[member], LogitBox(w.original), LogitBox(ul),
                     w.splits.aux, retrain, w.train, w.init, c);
    hits += a.p_member > 0.5;
  }
  EXPECT_GE(hits, 4);
}

}  // namespace
}  // namespace ulab
