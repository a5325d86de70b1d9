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

#include "ulab/audit.h"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

#include "ulab/errors.h"
#include "ulab/rng.h"
#include "ulab/scheduler.h"

namespace ulab {
namespace {

double LogNormalDensity(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

double Phi(const ModelParams& model, const Example& ex, ScoreKind kind) {
  return ComputeScore(model, ex, kind).value;
}

Dataset With(std::span<const Example> base, std::span<const Example> extra) {
  Dataset out(base.begin(), base.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

// Scores of every audited sample on one shadow model.
struct ShadowScores {
  std::vector<std::uint8_t> member;  // injected into this shadow
  std::vector<double> original;
  std::vector<double> retrain;
  // Per unlearner; empty when that unlearner failed on this shadow.
  std::vector<std::vector<double>> unlearned;
};

}  // namespace

std::string_view AuditModeName(AuditMode mode) {
  return mode == AuditMode::kULiraPlus ? "ulira_plus" : "ulira";
}

AuditMode ParseAuditMode(std::string_view name) {
  if (name == "ulira_plus") return AuditMode::kULiraPlus;
  if (name == "ulira") return AuditMode::kULira;
  throw UsageError("unknown audit mode '" + std::string(name) + "'");
}

void AuditConfig::Validate() const {
  if (num_audited < 2 || num_audited % 2 != 0) {
    throw UsageError("audited-set size N must be even and at least 2");
  }
  if (shadows < 4) throw UsageError("need at least 4 shadow models (T >= 4)");
  for (double f : fpr_grid) {
    if (!(f > 0.0 && f < 0.5)) throw UsageError("FPR targets must lie in (0, 0.5)");
  }
}

Example Mislabel(const Example& example, std::uint32_t num_classes) {
  if (num_classes != 2) {
    throw UnsupportedError("mislabeling is only defined for binary tasks");
  }
  if (example.label > 1) throw InputDomainError("label out of range");
  Example out = example;
  out.label = 1 - example.label;
  return out;
}

std::vector<std::uint8_t> BuildMask(std::size_t n, std::uint64_t seed) {
  if (n % 2 != 0) throw UsageError("mask size must be even");
  std::vector<std::uint8_t> mask(n, 0);
  std::fill(mask.begin(), mask.begin() + n / 2, 1);
  Rng rng(DeriveSeed(seed, "mask"));
  rng.Shuffle(std::span<std::uint8_t>(mask));
  return mask;
}

GaussianFit FitGaussian(std::span<const double> scores) {
  if (scores.size() < 2) throw UsageError("need at least two scores to fit");
  double mean = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) throw UsageError("non-finite score");
    mean += s;
  }
  mean /= static_cast<double>(scores.size());
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(scores.size() - 1));
  return {mean, std::max(sd, kSigmaFloor)};
}

LiraPosterior ComputeLiraPosterior(double observed, const GaussianPair& g) {
  if (!(g.sigma_in >= kSigmaFloor) || !(g.sigma_out >= kSigmaFloor)) {
    throw UsageError("Gaussian scale below the floor");
  }
  LiraPosterior post;
  const double log_in = LogNormalDensity(observed, g.mu_in, g.sigma_in);
  const double log_out = LogNormalDensity(observed, g.mu_out, g.sigma_out);
  post.log_ratio = log_in - log_out;
  const double log_min = std::log(DBL_MIN);
  if (log_in < log_min && log_out < log_min) {
    post.uninformative = true;
    post.p_member = 0.5;
    return post;
  }
  // N_in / (N_in + N_out) = sigmoid(log_in - log_out)
  post.p_member = 1.0 / (1.0 + std::exp(-post.log_ratio));
  return post;
}

std::vector<AuditReport> RunAudits(const AuditConfig& config,
                                   std::span<const NamedUnlearner> unlearners,
                                   const AuditPipeline& pipeline) {
  config.Validate();
  pipeline.data.Validate();
  pipeline.train.Validate();
  const std::size_t n_audit = config.num_audited;
  const std::size_t n_shadow = config.shadows;
  const std::size_t n_methods = unlearners.size();
  const ScoreKind kind = config.score_kind;
  const VocabSpec& vocab = pipeline.data.vocab;

  // Audited set, optionally mislabeled, and the balanced mask.
  Rng audit_rng(DeriveSeed(config.seed, "audit-set"));
  Dataset audited = SampleExamples(pipeline.data, n_audit, audit_rng);
  if (config.mode == AuditMode::kULiraPlus) {
    for (Example& ex : audited) ex = Mislabel(ex, vocab.num_classes);
  }
  const std::vector<std::uint8_t> mask = BuildMask(n_audit, config.seed);
  Dataset injected;
  for (std::size_t i = 0; i < n_audit; ++i) {
    if (mask[i]) injected.push_back(audited[i]);
  }

  // Test model: trained with the masked-in samples injected, then unlearned.
  const ModelParams init = InitModel(vocab, pipeline.embedding_seed);
  Rng test_rng(DeriveSeed(config.seed, "test-set"));
  const Dataset test_set =
      SampleExamples(pipeline.data, pipeline.data.train_size, test_rng);
  TrainConfig test_train = pipeline.train;
  test_train.seed = DeriveSeed(config.seed, "test-train");
  const ModelParams test_original =
      Train(test_train, With(test_set, injected), init);
  const UnlearnContext test_context{test_set, &test_train, &init};
  std::vector<ModelParams> test_unlearned;
  std::vector<std::string> test_notes(n_methods);
  for (std::size_t m = 0; m < n_methods; ++m) {
    UnlearnResult r = unlearners[m].run(test_original, injected, test_context);
    if (r.diverged) test_notes[m] = "test-model unlearning hit the divergence guard";
    test_unlearned.push_back(std::move(r.params));
  }

  // Shadow models follow the shared-shadow LiRA layout. Shadow pair k draws
  // a random balanced half H of the audited set; model 2k injects H and model
  // 2k+1 injects the complement, each into a fresh dataset, and both then
  // unlearn exactly what they injected. Every audited sample is therefore in
  // exactly T in-world and T out-world shadows, and each shadow sees the same
  // batch deletion as the test model.
  const bool any_retrain =
      std::any_of(unlearners.begin(), unlearners.end(),
                  [](const NamedUnlearner& u) { return u.is_retrain; });
  auto job = [&](std::size_t key) {
    const std::vector<std::uint8_t> half =
        BuildMask(n_audit, DeriveSeed(config.seed, "shadow-half", key / 2));
    const std::uint8_t side = key % 2 == 0 ? 1 : 0;
    Dataset forget;
    ShadowScores s;
    s.member.resize(n_audit);
    for (std::size_t n = 0; n < n_audit; ++n) {
      s.member[n] = half[n] == side;
      if (s.member[n]) forget.push_back(audited[n]);
    }
    Rng rng(DeriveSeed(config.seed, "shadow-set", key));
    const Dataset shadow_set =
        SampleExamples(pipeline.data, pipeline.data.train_size, rng);
    TrainConfig train = pipeline.train;
    train.seed = DeriveSeed(config.seed, "shadow-train", key);
    const ModelParams original = Train(train, With(shadow_set, forget), init);
    auto score_all = [&](const ModelParams& model) {
      std::vector<double> v(n_audit);
      for (std::size_t n = 0; n < n_audit; ++n) {
        v[n] = Phi(model, audited[n], kind);
      }
      return v;
    };
    s.original = score_all(original);
    if (any_retrain) s.retrain = score_all(Train(train, shadow_set, init));
    s.unlearned.resize(n_methods);
    const UnlearnContext context{shadow_set, &train, &init};
    for (std::size_t m = 0; m < n_methods; ++m) {
      if (unlearners[m].is_retrain) {
        s.unlearned[m] = s.retrain;
        continue;
      }
      try {
        s.unlearned[m] =
            score_all(unlearners[m].run(original, forget, context).params);
      } catch (const std::exception&) {
        // Left empty; counted as a dropped shadow for this method.
      }
    }
    return s;
  };
  const auto outcomes =
      ScheduleJobs<ShadowScores>(2 * n_shadow, job, pipeline.parallelism);

  std::size_t failed = 0;
  std::vector<std::string> job_notes;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (!outcomes[k].ok()) {
      ++failed;
      job_notes.push_back("shadow " + std::to_string(k) + " dropped: " +
                          outcomes[k].error);
    }
  }

  // Scores of sample n from the shadows on one side of the hypothesis.
  auto collect = [&](std::size_t n, bool member, auto pick) {
    std::vector<double> v;
    for (const auto& o : outcomes) {
      if (!o.ok() || o.value->member[n] != member) continue;
      const std::vector<double>& scores = pick(*o.value);
      if (scores.empty()) continue;
      if (std::isfinite(scores[n])) v.push_back(scores[n]);
    }
    return v;
  };
  const std::size_t quorum = (n_shadow + 1) / 2;
  auto posterior = [&](std::size_t n, double observed, auto pick,
                       LiraPosterior& out) {
    const auto in = collect(n, true, pick);
    const auto not_in = collect(n, false, pick);
    if (in.size() < quorum || not_in.size() < quorum) return false;
    const GaussianFit fi = FitGaussian(in);
    const GaussianFit fo = FitGaussian(not_in);
    out = ComputeLiraPosterior(observed,
                               {fi.mean, fi.stddev, fo.mean, fo.stddev});
    return true;
  };

  // Pre-unlearning view, shared by every method.
  std::vector<double> original_llr(n_audit, 0.0);
  std::vector<double> original_target(n_audit);
  for (std::size_t n = 0; n < n_audit; ++n) {
    original_target[n] = Phi(test_original, audited[n], kind);
    LiraPosterior post;
    if (posterior(n, original_target[n],
                  [](const ShadowScores& s) -> const std::vector<double>& {
                    return s.original;
                  },
                  post)) {
      original_llr[n] = post.log_ratio;
    }
  }
  const RocCurve original_roc = ComputeRoc(original_llr, mask);

  std::vector<AuditReport> reports;
  for (std::size_t m = 0; m < n_methods; ++m) {
    AuditReport r;
    r.method = unlearners[m].name;
    r.config = config;
    r.mask = mask;
    r.p_member.assign(n_audit, 0.5);
    r.log_ratio.assign(n_audit, 0.0);
    r.target_score.resize(n_audit);
    r.failed_shadows = failed;
    r.diagnostics = job_notes;
    if (!test_notes[m].empty()) r.diagnostics.push_back(test_notes[m]);
    std::size_t correct = 0;
    for (std::size_t n = 0; n < n_audit; ++n) {
      r.target_score[n] = Phi(test_unlearned[m], audited[n], kind);
      LiraPosterior post;
      if (!posterior(n, r.target_score[n],
                     [m](const ShadowScores& s) -> const std::vector<double>& {
                       return s.unlearned[m];
                     },
                     post)) {
        r.diagnostics.push_back("sample " + std::to_string(n) +
                                " aborted: too few surviving shadows");
      } else {
        r.p_member[n] = post.p_member;
        r.log_ratio[n] = post.log_ratio;
        if (post.uninformative) {
          r.diagnostics.push_back("sample " + std::to_string(n) +
                                  ": both likelihoods underflowed");
        }
      }
      const std::uint8_t pred = r.p_member[n] > 0.5 ? 1 : 0;
      correct += pred == mask[n];
    }
    r.binarized_accuracy =
        static_cast<double>(correct) / static_cast<double>(n_audit);
    r.roc = ComputeRoc(r.log_ratio, mask);
    r.original_log_ratio = original_llr;
    r.original_target_score = original_target;
    r.original_roc = original_roc;
    for (double f : config.fpr_grid) {
      r.tpr_at_fpr.push_back(r.roc.TprAt(f));
      r.original_tpr_at_fpr.push_back(original_roc.TprAt(f));
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

AuditReport RunAudit(const AuditConfig& config, const NamedUnlearner& unlearner,
                     const AuditPipeline& pipeline) {
  return RunAudits(config, std::span<const NamedUnlearner>(&unlearner, 1),
                   pipeline)
      .front();
}

}  // namespace ulab
