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


#include "ulab/mi.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <utility>

#include "ulab/errors.h"
#include "ulab/rng.h"
#include "ulab/scheduler.h"

namespace ulab {
namespace {

double HingeAtLabel(std::span<const double> logits, std::uint32_t label) {
  return ScoreFromProbability(Softmax(logits)[label], ScoreKind::kHingeLogit);
}

// Features of every target on one shadow model.
struct ShadowPairOutput {
  std::vector<std::uint8_t> member;
  std::vector<std::optional<MiFeature>> features;
  std::vector<std::string> notes;
};

}  // namespace

ScoreOracle ScoreBox(ModelParams model) {
  return [model = std::move(model)](const Example& ex, ScoreKind kind) {
    return ComputeScore(model, ex, kind);
  };
}

LogitOracle LogitBox(ModelParams model) {
  return [model = std::move(model)](const Example& ex) {
    return Logits(model, ex.tokens);
  };
}

double StrictMiStatistic(const Score& original, const Score& unlearned) {
  if (original.kind != unlearned.kind) {
    throw UsageError("strict MI compares scores of one kind");
  }
  return std::abs(unlearned.value - original.value);
}

std::size_t NtsAt1Nfs(std::span<const double> statistics,
                      std::span<const std::uint8_t> membership) {
  if (statistics.size() != membership.size()) {
    throw UsageError("statistics and membership differ in length");
  }
  std::size_t members = 0;
  for (std::uint8_t m : membership) {
    if (m > 1) throw UsageError("membership entries must be 0 or 1");
    members += m;
  }
  if (members == 0 || members == membership.size()) {
    throw UsageError("NTS@1NFS needs members and non-members");
  }
  std::vector<std::size_t> order(statistics.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    if (statistics[a] != statistics[b]) return statistics[a] > statistics[b];
    return membership[a] < membership[b];
  });
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i : order) {
    if (membership[i]) {
      ++tp;
    } else if (++fp == 2) {
      break;
    }
  }
  return tp;
}

StrictMiReport RunStrictMi(const ScoreOracle& original,
                           const ScoreOracle& unlearned,
                           std::span<const Example> candidates,
                           std::span<const std::uint8_t> membership,
                           ScoreKind kind) {
  if (candidates.size() != membership.size()) {
    throw UsageError("candidates and membership differ in length");
  }
  StrictMiReport report;
  report.score_kind = kind;
  report.membership.assign(membership.begin(), membership.end());
  for (const Example& ex : candidates) {
    report.statistics.push_back(
        StrictMiStatistic(original(ex, kind), unlearned(ex, kind)));
  }
  report.nts_at_1nfs = NtsAt1Nfs(report.statistics, membership);
  report.roc = ComputeRoc(report.statistics, membership);
  return report;
}

std::vector<double> MiFeature::Flat() const {
  std::vector<double> out(l_ori);
  out.insert(out.end(), l_ul.begin(), l_ul.end());
  out.insert(out.end(), l_diff.begin(), l_diff.end());
  return out;
}

MiFeature BuildFeature(std::span<const double> l_ori,
                       std::span<const double> l_ul, std::uint8_t label) {
  if (l_ori.size() != l_ul.size() || l_ori.empty()) {
    throw UsageError("feature logit vectors must have equal nonzero length");
  }
  MiFeature f;
  f.l_ori.assign(l_ori.begin(), l_ori.end());
  f.l_ul.assign(l_ul.begin(), l_ul.end());
  f.l_diff.resize(l_ori.size());
  for (std::size_t c = 0; c < l_ori.size(); ++c) {
    f.l_diff[c] = l_ori[c] - l_ul[c];
  }
  f.label = label;
  return f;
}

void RelaxedMiConfig::Validate() const {
  if (shadows < 8) throw UsageError("relaxed MI needs T >= 8 shadows");
  if (shadow_train_size == 0) throw UsageError("shadow_train_size must be > 0");
  attack.Validate();
}

std::vector<ShadowFeatureSet> BuildShadowFeatures(
    std::span<const Example> targets, std::span<const Example> aux,
    const NamedUnlearner& unlearner, const TrainConfig& train,
    const ModelParams& init, const RelaxedMiConfig& config,
    std::size_t parallelism, std::vector<std::string>* diagnostics) {
  config.Validate();
  const std::size_t n = targets.size();
  if (n == 0) throw UsageError("relaxed MI needs at least one target");

  // Shadow data never contains a target, even as an exact duplicate.
  std::set<std::vector<std::uint32_t>> target_tokens;
  for (const Example& t : targets) target_tokens.insert(t.tokens);
  std::vector<Example> pool;
  for (const Example& ex : aux) {
    if (!target_tokens.contains(ex.tokens)) pool.push_back(ex);
  }
  if (pool.size() < config.shadow_train_size) {
    throw UsageError("auxiliary data smaller than the shadow training size");
  }

  auto job = [&](std::size_t key) {
    Rng split(DeriveSeed(config.seed, "mi-shadow-half", key / 2));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    split.Shuffle(std::span<std::size_t>(perm));
    ShadowPairOutput out;
    out.member.assign(n, 0);
    const std::size_t first = (n + 1) / 2;
    for (std::size_t r = 0; r < n; ++r) {
      out.member[perm[r]] = (r < first) == (key % 2 == 0);
    }

    Rng rng(DeriveSeed(config.seed, "mi-shadow-set", key));
    std::vector<Example> shuffled = pool;
    for (std::size_t i = 0; i < config.shadow_train_size; ++i) {
      std::swap(shuffled[i], shuffled[i + rng.Below(shuffled.size() - i)]);
    }
    const Dataset base(shuffled.begin(),
                       shuffled.begin() + config.shadow_train_size);
    Dataset data = base;
    for (std::size_t t = 0; t < n; ++t) {
      if (out.member[t]) data.push_back(targets[t]);
    }
    TrainConfig tc = train;
    tc.seed = DeriveSeed(config.seed, "mi-shadow-train", key);
    const ModelParams original = Train(tc, data, init);

    auto without = [&](const Example& drop) {
      Dataset rest;
      bool dropped = false;
      for (const Example& ex : data) {
        if (!dropped && ex == drop) {
          dropped = true;
          continue;
        }
        rest.push_back(ex);
      }
      return rest;
    };
    auto unlearn = [&](const Example& forget, const Dataset& remaining) {
      if (unlearner.is_retrain) return Train(tc, remaining, init);
      const UnlearnContext context{remaining, &tc, &init};
      return unlearner.run(original, std::span<const Example>(&forget, 1),
                           context)
          .params;
    };

    out.features.resize(n);
    // Out-world: one random x' from this model's own data.
    Rng pick(DeriveSeed(config.seed, "mi-shadow-forget", key));
    const Example& other = base[pick.Below(base.size())];
    std::optional<ModelParams> out_model;
    for (std::size_t t = 0; t < n; ++t) {
      try {
        const auto l_ori = Logits(original, targets[t].tokens);
        if (out.member[t]) {
          const ModelParams ul = unlearn(targets[t], without(targets[t]));
          out.features[t] =
              BuildFeature(l_ori, Logits(ul, targets[t].tokens), 1);
        } else {
          if (!out_model) out_model = unlearn(other, without(other));
          out.features[t] =
              BuildFeature(l_ori, Logits(*out_model, targets[t].tokens), 0);
        }
      } catch (const std::exception& e) {
        out.notes.push_back("shadow " + std::to_string(key) + ", target " +
                            std::to_string(t) + ": " + e.what());
      }
    }
    return out;
  };
  const auto outcomes = ScheduleJobs<ShadowPairOutput>(2 * config.shadows,
                                                       job, parallelism);

  std::vector<ShadowFeatureSet> sets(n);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& o = outcomes[k];
    if (!o.ok()) {
      if (diagnostics) {
        diagnostics->push_back("shadow " + std::to_string(k) +
                               " dropped: " + o.error);
      }
      continue;
    }
    if (diagnostics) {
      diagnostics->insert(diagnostics->end(), o.value->notes.begin(),
                          o.value->notes.end());
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (!o.value->features[t]) continue;
      (o.value->member[t] ? sets[t].in : sets[t].out)
          .push_back(*o.value->features[t]);
    }
  }
  return sets;
}

LiraPosterior LiraMiBaseline(const Example& target, const MiFeature& observed,
                             const ShadowFeatureSet& shadows) {
  std::vector<double> in;
  std::vector<double> out;
  for (const MiFeature& f : shadows.in) {
    in.push_back(HingeAtLabel(f.l_ul, target.label));
  }
  for (const MiFeature& f : shadows.out) {
    out.push_back(HingeAtLabel(f.l_ul, target.label));
  }
  const GaussianFit fi = FitGaussian(in);
  const GaussianFit fo = FitGaussian(out);
  return ComputeLiraPosterior(HingeAtLabel(observed.l_ul, target.label),
                              {fi.mean, fi.stddev, fo.mean, fo.stddev});
}

TargetAttack AttackTarget(const Example& target, const MiFeature& observed,
                          const ShadowFeatureSet& shadows,
                          const AttackModelConfig& config) {
  TargetAttack result;
  std::vector<std::vector<double>> xs;
  std::vector<std::uint8_t> ys;
  for (const auto* world : {&shadows.in, &shadows.out}) {
    for (const MiFeature& f : *world) {
      xs.push_back(f.Flat());
      ys.push_back(f.label);
    }
  }
  try {
    const AttackModel model = AttackModel::Fit(xs, ys, config);
    result.p_member = model.Predict(observed.Flat());
  } catch (const std::exception& e) {
    result.attack_failed = true;
    result.p_member = 0.5;
    result.diagnostics.push_back(std::string("attack model failed: ") +
                                 e.what());
  }
  try {
    const LiraPosterior post = LiraMiBaseline(target, observed, shadows);
    result.lira_p_member = post.p_member;
    result.lira_log_ratio = post.log_ratio;
  } catch (const std::exception& e) {
    result.diagnostics.push_back(std::string("LiRA baseline failed: ") +
                                 e.what());
  }
  return result;
}

TargetAttack RunRelaxedMi(const Example& target, const LogitOracle& original,
                          const LogitOracle& unlearned,
                          std::span<const Example> aux,
                          const NamedUnlearner& unlearner,
                          const TrainConfig& train, const ModelParams& init,
                          const RelaxedMiConfig& config,
                          std::size_t parallelism) {
  std::vector<std::string> notes;
  const auto sets =
      BuildShadowFeatures(std::span<const Example>(&target, 1), aux, unlearner,
                          train, init, config, parallelism, &notes);
  const MiFeature observed =
      BuildFeature(original(target), unlearned(target), 0);
  TargetAttack result = AttackTarget(target, observed, sets[0], config.attack);
  result.diagnostics.insert(result.diagnostics.begin(), notes.begin(),
                            notes.end());
  return result;
}

}  // namespace ulab
