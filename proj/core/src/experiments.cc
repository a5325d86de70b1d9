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


#include "ulab/experiments.h"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "ulab/errors.h"
#include "ulab/rng.h"
#include "ulab/scheduler.h"
#include "ulab/synth.h"
#include "ulab/train.h"

namespace ulab {
namespace {

std::vector<UnlearnMethod> ChooseMethods(
    std::span<const UnlearnMethod> requested,
    const std::vector<UnlearnMethod>& fallback) {
  std::vector<UnlearnMethod> out(requested.begin(), requested.end());
  if (out.empty()) out = fallback;
  return out;
}

std::vector<UnlearnMethod> ConfiguredMethods(const ExperimentConfig& config) {
  std::vector<UnlearnMethod> out;
  for (const UnlearnConfig& c : config.unlearn) out.push_back(c.method);
  return out;
}

NamedUnlearner UnlearnerFor(const ExperimentConfig& config,
                            UnlearnMethod method, const SeedPlan& plan) {
  UnlearnConfig c = config.UnlearnFor(method);
  c.seed = plan.unlearn;
  return MakeUnlearner(c);
}

// One repetition's data and learning setup.
struct World {
  SeedPlan plan;
  DataGenConfig data;
  DataSplits splits;
  TrainConfig train;
  ModelParams init;
};

World MakeWorld(const ExperimentConfig& config, std::uint32_t repetition) {
  World w;
  w.plan = DeriveSeedPlan(config.master_seed, repetition);
  w.data = config.data;
  w.data.seed = w.plan.data;
  w.splits = Generate(w.data);
  w.train = config.train;
  w.train.seed = w.plan.train;
  w.init = InitModel(w.data.vocab, w.plan.embedding);
  return w;
}

// `count` fresh examples, mislabeled on request, with a balanced membership
// mask.
std::pair<Dataset, std::vector<std::uint8_t>> Candidates(
    const DataGenConfig& data, std::size_t count, bool mislabel,
    std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "candidates"));
  Dataset out = SampleExamples(data, count, rng);
  if (mislabel) {
    for (Example& ex : out) ex = Mislabel(ex, data.vocab.num_classes);
  }
  return {std::move(out), BuildMask(count, seed)};
}

Dataset Concat(std::span<const Example> a, std::span<const Example> b) {
  Dataset out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Dataset Without(std::span<const Example> data, const Example& drop) {
  Dataset out;
  bool removed = false;
  for (const Example& ex : data) {
    if (!removed && ex == drop) {
      removed = true;
      continue;
    }
    out.push_back(ex);
  }
  return out;
}

std::string Prefix(std::string_view campaign, std::uint32_t repetition) {
  return std::string(campaign) + " repetition " + std::to_string(repetition);
}

}  // namespace

AuditCampaignResult RunAuditCampaign(const ExperimentConfig& config,
                                     std::span<const UnlearnMethod> methods) {
  config.Validate();
  AuditCampaignResult result;
  result.methods = ChooseMethods(methods, ConfiguredMethods(config));
  for (std::uint32_t r = 0; r < config.repetitions; ++r) {
    const SeedPlan plan = DeriveSeedPlan(config.master_seed, r);
    AuditPipeline pipeline;
    pipeline.data = config.data;
    pipeline.data.seed = plan.data;
    pipeline.train = config.train;
    pipeline.train.seed = plan.train;
    pipeline.embedding_seed = plan.embedding;
    pipeline.parallelism = config.threads;
    std::vector<NamedUnlearner> unlearners;
    for (UnlearnMethod m : result.methods) {
      unlearners.push_back(UnlearnerFor(config, m, plan));
    }
    for (AuditMode mode : config.audit.modes) {
      AuditConfig audit = config.audit.audit;
      audit.mode = mode;
      audit.seed = plan.audit;
      const std::string where =
          Prefix("audit", r) + " " + std::string(AuditModeName(mode));
      try {
        std::vector<AuditReport> reports =
            RunAudits(audit, unlearners, pipeline);
        for (AuditReport& rep : reports) {
          if (rep.failed_shadows > 0) {
            result.failures.push_back(
                where + " " + rep.method + ": " +
                std::to_string(rep.failed_shadows) + " shadow model(s) failed");
          }
          result.runs.push_back({r, mode, std::move(rep)});
        }
      } catch (const std::exception& e) {
        result.failures.push_back(where + ": " + e.what());
      }
    }
  }
  return result;
}

StrictMiCampaignResult RunStrictMiCampaign(
    const ExperimentConfig& config, std::span<const UnlearnMethod> methods) {
  config.Validate();
  StrictMiCampaignResult result;
  result.methods = ChooseMethods(methods, ConfiguredMethods(config));
  result.score_kinds = config.strict_mi.score_kinds;
  for (std::uint32_t r = 0; r < config.repetitions; ++r) {
    const std::string where = Prefix("mi-strict", r);
    try {
      const World w = MakeWorld(config, r);
      const auto [candidates, mask] =
          Candidates(w.data, config.strict_mi.num_candidates,
                     config.strict_mi.mislabel, w.plan.strict_mi);
      Dataset injected;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (mask[i]) injected.push_back(candidates[i]);
      }
      const ModelParams original =
          Train(w.train, Concat(w.splits.train, injected), w.init);
      const UnlearnContext context{w.splits.train, &w.train, &w.init};
      auto job = [&](std::size_t m) {
        const NamedUnlearner u = UnlearnerFor(config, result.methods[m], w.plan);
        const UnlearnResult ul = u.run(original, injected, context);
        std::vector<StrictMiReport> reports;
        for (ScoreKind kind : result.score_kinds) {
          reports.push_back(RunStrictMi(ScoreBox(original), ScoreBox(ul.params),
                                        candidates, mask, kind));
        }
        return reports;
      };
      const auto outcomes = ScheduleJobs<std::vector<StrictMiReport>>(
          result.methods.size(), job, config.threads);
      for (std::size_t m = 0; m < outcomes.size(); ++m) {
        if (!outcomes[m].ok()) {
          result.failures.push_back(
              where + " " + std::string(UnlearnMethodName(result.methods[m])) +
              ": " + outcomes[m].error);
          continue;
        }
        for (const StrictMiReport& rep : *outcomes[m].value) {
          result.runs.push_back({r, result.methods[m], rep});
        }
      }
    } catch (const std::exception& e) {
      result.failures.push_back(where + ": " + e.what());
    }
  }
  return result;
}

RelaxedMiCampaignResult RunRelaxedMiCampaign(
    const ExperimentConfig& config, std::span<const UnlearnMethod> methods) {
  config.Validate();
  const RelaxedMiCampaignConfig& cc = config.relaxed_mi;
  RelaxedMiCampaignResult result;
  result.methods = ChooseMethods(methods, cc.methods);
  result.fpr = cc.fpr;
  for (std::uint32_t r = 0; r < config.repetitions; ++r) {
    std::optional<World> world;
    try {
      world.emplace(MakeWorld(config, r));
    } catch (const std::exception& e) {
      result.failures.push_back(Prefix("mi-relaxed", r) + ": " + e.what());
      continue;
    }
    const World& w = *world;
    const auto [targets, mask] = Candidates(w.data, cc.num_targets,
                                            cc.mislabel, w.plan.relaxed_mi);
    Dataset injected;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (mask[i]) injected.push_back(targets[i]);
    }
    const Dataset full = Concat(w.splits.train, injected);
    std::optional<ModelParams> trained;
    try {
      trained.emplace(Train(w.train, full, w.init));
    } catch (const std::exception& e) {
      result.failures.push_back(Prefix("mi-relaxed", r) + ": " + e.what());
      continue;
    }
    const ModelParams& original = *trained;
    for (UnlearnMethod method : result.methods) {
      const std::string where = Prefix("mi-relaxed", r) + " " +
                                std::string(UnlearnMethodName(method));
      try {
        const NamedUnlearner unlearner = UnlearnerFor(config, method, w.plan);
        RelaxedMiConfig mi = cc.mi;
        mi.seed = w.plan.relaxed_mi;
        std::vector<std::string> notes;
        const std::vector<ShadowFeatureSet> shadows = BuildShadowFeatures(
            targets, w.splits.aux, unlearner, w.train, w.init, mi,
            config.threads, &notes);
        for (const std::string& n : notes) {
          result.failures.push_back(where + ": " + n);
        }

        // Observed features: members are unlearned alone, non-members are
        // seen on a model that unlearned a random training example.
        auto observe = [&](std::size_t i) {
          Example forget = targets[i];
          if (!mask[i]) {
            Rng rng(DeriveSeed(w.plan.relaxed_mi, "observed-forget", i));
            forget = w.splits.train[rng.Below(w.splits.train.size())];
          }
          const Dataset remaining = Without(full, forget);
          const UnlearnContext context{remaining, &w.train, &w.init};
          const UnlearnResult ul = unlearner.run(
              original, std::span<const Example>(&forget, 1), context);
          const MiFeature observed =
              BuildFeature(Logits(original, targets[i].tokens),
                           Logits(ul.params, targets[i].tokens), mask[i]);
          AttackModelConfig attack = mi.attack;
          attack.seed = DeriveSeed(w.plan.relaxed_mi, "attack", i);
          return AttackTarget(targets[i], observed, shadows[i], attack);
        };
        const auto outcomes =
            ScheduleJobs<TargetAttack>(targets.size(), observe, config.threads);
        std::vector<double> p;
        std::vector<double> llr;
        std::vector<std::uint8_t> labels;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          if (!outcomes[i].ok()) {
            result.failures.push_back(where + " target " + std::to_string(i) +
                                      ": " + outcomes[i].error);
            continue;
          }
          const TargetAttack& a = *outcomes[i].value;
          for (const std::string& d : a.diagnostics) {
            result.failures.push_back(where + " target " + std::to_string(i) +
                                      ": " + d);
          }
          result.targets.push_back({r, method, static_cast<std::uint32_t>(i),
                                    mask[i] != 0, a.p_member, a.lira_p_member,
                                    a.lira_log_ratio, a.attack_failed});
          p.push_back(a.p_member);
          llr.push_back(a.lira_log_ratio);
          labels.push_back(mask[i]);
        }
        const RocCurve tula = ComputeRoc(p, labels);
        const RocCurve lira = ComputeRoc(llr, labels);
        result.runs.push_back({r, method, tula.TprAt(cc.fpr), tula.auc,
                               lira.TprAt(cc.fpr), lira.auc});
      } catch (const std::exception& e) {
        result.failures.push_back(where + ": " + e.what());
      }
    }
  }
  return result;
}

DrCampaignResult RunDrCampaign(const ExperimentConfig& config,
                               std::span<const UnlearnMethod> methods) {
  config.Validate();
  const DrCampaignConfig& cc = config.dr;
  DrCampaignResult result;
  result.methods = ChooseMethods(methods, cc.methods);
  for (UnlearnMethod m : result.methods) {
    if (m == UnlearnMethod::kRetrain) {
      throw UnsupportedError("reconstruction needs an inexact method");
    }
  }
  const std::size_t batch = cc.recon.batch_size;
  for (std::uint32_t r = 0; r < config.repetitions; ++r) {
    std::optional<World> world;
    std::optional<ModelParams> original;
    try {
      world.emplace(MakeWorld(config, r));
      original.emplace(Train(world->train, world->splits.train, world->init));
    } catch (const std::exception& e) {
      result.failures.push_back(Prefix("dr", r) + ": " + e.what());
      continue;
    }
    const World& w = *world;
    // Distinct training indices, grouped into unlearning batches.
    std::vector<std::size_t> order(w.splits.train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(DeriveSeed(w.plan.dr, "targets"));
    rng.Shuffle(std::span<std::size_t>(order));
    order.resize(cc.num_targets);
    for (UnlearnMethod method : result.methods) {
      const NamedUnlearner unlearner = UnlearnerFor(config, method, w.plan);
      for (std::size_t g = 0; g * batch < order.size(); ++g) {
        const std::string where = Prefix("dr", r) + " " +
                                  std::string(UnlearnMethodName(method)) +
                                  " group " + std::to_string(g);
        try {
          DrTarget t;
          t.repetition = r;
          t.method = method;
          t.group = static_cast<std::uint32_t>(g);
          std::vector<std::uint8_t> drop(w.splits.train.size(), 0);
          for (std::size_t k = g * batch; k < (g + 1) * batch; ++k) {
            t.truth.push_back(w.splits.train[order[k]]);
            drop[order[k]] = 1;
          }
          Dataset remaining;
          for (std::size_t i = 0; i < drop.size(); ++i) {
            if (!drop[i]) remaining.push_back(w.splits.train[i]);
          }
          const UnlearnContext context{remaining, &w.train, &w.init};
          const UnlearnResult ul = unlearner.run(*original, t.truth, context);
          ReconConfig recon = cc.recon;
          recon.method = method;
          recon.seed = DeriveSeed(w.plan.dr, "recon", g);
          const ReconResult rec =
              Reconstruct(*original, ul.params, recon, config.threads);
          for (const std::string& d : rec.diagnostics) {
            result.failures.push_back(where + ": " + d);
          }
          t.no_signal = rec.no_signal;
          t.rec_loss = rec.rec_loss;
          t.best_restart = rec.best_restart;
          t.baseline =
              RandomBaselineRouge(t.truth, w.data.vocab.vocab_size,
                                  cc.baseline_draws,
                                  DeriveSeed(w.plan.dr, "baseline", g));
          if (rec.decoded.size() == t.truth.size()) {
            std::vector<std::size_t> assignment;
            t.rouge = ScoreReconstruction(rec.decoded, t.truth, &assignment);
            t.decoded.resize(t.truth.size());
            std::size_t correct = 0;
            for (std::size_t i = 0; i < t.truth.size(); ++i) {
              t.decoded[i] = rec.decoded[assignment[i]];
              correct += t.decoded[i].label == t.truth[i].label;
            }
            t.label_accuracy =
                static_cast<double>(correct) / static_cast<double>(t.truth.size());
          }
          result.targets.push_back(std::move(t));
        } catch (const std::exception& e) {
          result.failures.push_back(where + ": " + e.what());
        }
      }
    }
  }
  return result;
}

}  // namespace ulab
