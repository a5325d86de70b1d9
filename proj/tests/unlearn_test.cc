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
#include "oracles.h"
#include "ulab/audit.h"
#include "ulab/errors.h"
#include "ulab/synth.h"
#include "ulab/train.h"
#include "ulab/unlearn.h"

namespace ulab {
namespace {

class UnlearnTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_.vocab = VocabSpec::Make(256, 32, 8);
    data_.train_size = 200;
    data_.aux_size = 10;
    data_.audit_size = 4;
    data_.holdout_size = 10;
    splits_ = Generate(data_);
    init_ = InitModel(data_.vocab, 3);
    canary_ = Mislabel(splits_.holdout[0]);
    full_ = splits_.train;
    full_.push_back(canary_);
    original_ = Train(train_, full_, init_);
  }

  std::span<const Example> Forget() const { return {&canary_, 1}; }

  DataGenConfig data_;
  DataSplits splits_;
  TrainConfig train_;
  ModelParams init_;
  Example canary_;
  Dataset full_;
  ModelParams original_;
};

double CanaryLoss(const ModelParams& m, const Example& ex) {
  return MeanLoss(m, std::span<const Example>(&ex, 1));
}

TEST(UnlearnMethodTest, NamesRoundTrip) {
  for (UnlearnMethod m : kAllUnlearnMethods) {
    EXPECT_EQ(ParseUnlearnMethod(UnlearnMethodName(m)), m);
  }
  EXPECT_EQ(UnlearnMethodLabel(UnlearnMethod::kTaskVec), "TaskVec");
  EXPECT_THROW(ParseUnlearnMethod("finetune"), UsageError);
}

TEST(UnlearnConfigTest, RejectsBadValues) {
  UnlearnConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.learning_rate = -1.0;
  EXPECT_THROW(c.Validate(), UsageError);
  c = UnlearnConfig{};
  c.method = UnlearnMethod::kNpo;
  c.npo_beta = 0.0;
  EXPECT_THROW(c.Validate(), UsageError);
  c = UnlearnConfig{};
  c.steps = 10001;
  EXPECT_THROW(c.Validate(), UsageError);
}

TEST_F(UnlearnTest, RetrainOnUnchangedDataIsBitIdentical) {
  EXPECT_EQ(Retrain(full_, train_, init_).head, original_.head);
}

TEST_F(UnlearnTest, RetrainRaisesCanaryLoss) {
  const ModelParams retrained = Retrain(splits_.train, train_, init_);
  EXPECT_GE(CanaryLoss(retrained, canary_), CanaryLoss(original_, canary_));
}

TEST_F(UnlearnTest, ZeroLearningRateIsIdentity) {
  for (UnlearnMethod m : {UnlearnMethod::kGa, UnlearnMethod::kKl,
                          UnlearnMethod::kNpo, UnlearnMethod::kTaskVec}) {
    UnlearnConfig c;
    c.method = m;
    c.learning_rate = 0.0;
    UnlearnContext ctx{splits_.train, &train_, &init_};
    EXPECT_EQ(Unlearn(c, original_, Forget(), ctx).params.head,
              original_.head)
        << UnlearnMethodName(m);
  }
}

TEST_F(UnlearnTest, OneGaStepAddsScaledGradient) {
  UnlearnConfig c;
  c.steps = 1;
  c.learning_rate = 0.05;
  const ModelParams ga = GaUnlearn(original_, Forget(), c).params;
  Head want = original_.head;
  want.Axpy(0.05, Gradient(original_, Forget()));
  EXPECT_EQ(ga.head, want);
}

TEST_F(UnlearnTest, GaObjectiveIsSummedOverForgetSet) {
  const Dataset forget(splits_.train.begin(), splits_.train.begin() + 3);
  UnlearnConfig c;
  c.steps = 1;
  const ModelParams ga = GaUnlearn(original_, forget, c).params;
  const Head delta = ga.head - original_.head;
  Head want = Gradient(original_, forget);
  want *= 3.0 * c.learning_rate;
  EXPECT_LT(testing::RelativeError(delta.values(), want.values()), 1e-12);
}

TEST_F(UnlearnTest, KlZeroStepsIsIdentity) {
  UnlearnConfig c;
  c.method = UnlearnMethod::kKl;
  c.steps = 0;
  const ModelParams kl = KlUnlearn(original_, Forget(), {}, c).params;
  EXPECT_EQ(kl.head, original_.head);
  EXPECT_EQ(MeanKl(original_, kl, Forget()), 0.0);
}

TEST_F(UnlearnTest, KlIgnoresRetainSetAtZeroWeight) {
  UnlearnConfig c;
  c.method = UnlearnMethod::kKl;
  const Dataset other(splits_.aux.begin(), splits_.aux.end());
  EXPECT_EQ(KlUnlearn(original_, Forget(), splits_.train, c).params.head,
            KlUnlearn(original_, Forget(), other, c).params.head);
}

TEST_F(UnlearnTest, KlFirstStepIsGradientAscent) {
  UnlearnConfig kc;
  kc.method = UnlearnMethod::kKl;
  kc.steps = 1;
  UnlearnConfig gc;
  gc.steps = 1;
  EXPECT_EQ(KlUnlearn(original_, Forget(), {}, kc).params.head,
            GaUnlearn(original_, Forget(), gc).params.head);
}

TEST_F(UnlearnTest, TaskVecNeutralSettings) {
  UnlearnConfig c;
  c.method = UnlearnMethod::kTaskVec;
  c.taskvec_lambda = 0.0;
  EXPECT_EQ(TaskVecUnlearn(original_, Forget(), c).params.head,
            original_.head);
  c = UnlearnConfig{};
  c.method = UnlearnMethod::kTaskVec;
  c.learning_rate = 0.0;
  EXPECT_EQ(TaskVecUnlearn(original_, Forget(), c).params.head,
            original_.head);
}

TEST_F(UnlearnTest, DefaultsRaiseForgetLoss) {
  const double before = CanaryLoss(original_, canary_);
  for (UnlearnMethod m : {UnlearnMethod::kGa, UnlearnMethod::kKl,
                          UnlearnMethod::kNpo, UnlearnMethod::kTaskVec}) {
    UnlearnConfig c;
    c.method = m;
    UnlearnContext ctx{splits_.train, &train_, &init_};
    const UnlearnResult r = Unlearn(c, original_, Forget(), ctx);
    EXPECT_FALSE(r.diverged);
    EXPECT_GT(CanaryLoss(r.params, canary_), before) << UnlearnMethodName(m);
  }
}

TEST_F(UnlearnTest, DivergenceStopsEarly) {
  UnlearnConfig c;
  c.learning_rate = 1e4;
  c.steps = 50;
  const UnlearnResult r = GaUnlearn(original_, Forget(), c);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.steps_run, 50u);
  EXPECT_TRUE(r.params.head.AllFinite());
}

TEST_F(UnlearnTest, EmptyForgetSetIsUsageError) {
  EXPECT_THROW(GaUnlearn(original_, {}, UnlearnConfig{}), UsageError);
}

TEST_F(UnlearnTest, RetrainNeedsContext) {
  UnlearnConfig c;
  c.method = UnlearnMethod::kRetrain;
  EXPECT_THROW(Unlearn(c, original_, Forget(), UnlearnContext{}),
               UsageError);
}

TEST_F(UnlearnTest, IdentityUnlearnerReturnsOriginal) {
  const NamedUnlearner u = IdentityUnlearner();
  EXPECT_EQ(u.run(original_, Forget(), UnlearnContext{}).params.head,
            original_.head);
}

// Gradients of the exposed objectives against central differences, at the
// reference point and away from it.
class ObjectiveGradientTest : public ::testing::TestWithParam<int> {};

TEST_P(ObjectiveGradientTest, NpoAndNegKlMatchFiniteDifferences) {
  const std::uint64_t seed = GetParam();
  const ModelParams ref = testing::RandomModel(16, 4, 3, 2, seed);
  ModelParams at = testing::RandomModel(16, 4, 3, 2, seed + 1000, 0.3);
  at.embedding = ref.embedding;
  at.head += ref.head;
  Dataset forget;
  for (int i = 0; i < 3; ++i) {
    forget.push_back(testing::RandomExample(ref.spec, seed * 7 + i));
  }
  const std::vector<double> x(at.head.values().begin(),
                              at.head.values().end());
  ModelParams probe = at;
  auto set = [&](std::span<const double> v) {
    std::copy(v.begin(), v.end(), probe.head.values().begin());
  };
  for (double beta : {0.5, 1.0, 2.0}) {
    auto npo = [&](std::span<const double> v) {
      set(v);
      return NpoLoss(probe, ref, forget, beta);
    };
    EXPECT_LT(testing::RelativeError(NpoGradient(at, ref, forget, beta).values(),
                                     testing::CentralDifference(npo, x, 1e-5)),
              1e-6);
  }
  auto kl = [&](std::span<const double> v) {
    set(v);
    return NegKlLoss(probe, ref, forget);
  };
  EXPECT_LT(testing::RelativeError(NegKlGradient(at, ref, forget).values(),
                                   testing::CentralDifference(kl, x, 1e-5)),
            1e-6);
}

TEST_P(ObjectiveGradientTest, NpoAtReferenceIsSummedCrossEntropyAscent) {
  const std::uint64_t seed = GetParam();
  const ModelParams ref = testing::RandomModel(16, 4, 3, 2, seed);
  Dataset forget;
  for (int i = 0; i < 2; ++i) {
    forget.push_back(testing::RandomExample(ref.spec, seed * 5 + i));
  }
  // d/dtheta (2/beta) log(1 + r^beta) at r = 1 is grad log p = -grad CE.
  Head want = Gradient(ref, forget);
  want *= -2.0;
  EXPECT_LT(testing::RelativeError(NpoGradient(ref, ref, forget, 1.0).values(),
                                   want.values()),
            1e-12);
  EXPECT_NEAR(NegKlGradient(ref, ref, forget).Norm(), 0.0, 1e-15);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ObjectiveGradientTest, ::testing::Range(0, 10));

}  // namespace
}  // namespace ulab
