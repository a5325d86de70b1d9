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

#include "ulab/unlearn.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ulab/errors.h"

namespace ulab {
namespace {

// Per-example quantities that every unlearning objective needs.
struct Evaluated {
  std::vector<double> pooled;
  std::vector<double> probs;
};

Evaluated Evaluate(const ModelParams& params, const Example& ex) {
  Evaluated e;
  e.pooled = Pool(params, ex.tokens);
  e.probs = Softmax(HeadLogits(params.head, e.pooled));
  return e;
}

double LogClamped(double p) { return std::log(std::max(p, kProbClamp)); }

void RequireForget(std::span<const Example> forget) {
  if (forget.empty()) throw UsageError("unlearning needs a nonempty D_unlearn");
}

// Objectives are summed over D_unlearn so that each deleted example receives
// the same push whatever the size of the deletion batch.
Head SumGradient(const ModelParams& params, std::span<const Example> forget) {
  Head g = Gradient(params, forget);
  g *= static_cast<double>(forget.size());
  return g;
}

// Mean cross-entropy on the forget set; the divergence guard watches it.
// The clamped loss never exceeds -log(kProbClamp), so the guard uses the
// unclamped log-sum-exp form.
bool Diverged(const ModelParams& params, std::span<const Example> forget) {
  if (!params.head.AllFinite()) return true;
  double total = 0.0;
  for (const Example& ex : forget) {
    const std::vector<double> z = Logits(params, ex.tokens);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    total += zmax + std::log(sum) - z[ex.label];
  }
  const double loss = total / static_cast<double>(forget.size());
  return !std::isfinite(loss) || loss > kDivergenceLoss;
}

}  // namespace

std::string_view UnlearnMethodName(UnlearnMethod method) {
  switch (method) {
    case UnlearnMethod::kRetrain:
      return "retrain";
    case UnlearnMethod::kGa:
      return "ga";
    case UnlearnMethod::kKl:
      return "kl";
    case UnlearnMethod::kNpo:
      return "npo";
    case UnlearnMethod::kTaskVec:
      return "taskvec";
  }
  return "unknown";
}

std::string_view UnlearnMethodLabel(UnlearnMethod method) {
  switch (method) {
    case UnlearnMethod::kRetrain:
      return "Retrain";
    case UnlearnMethod::kGa:
      return "GA";
    case UnlearnMethod::kKl:
      return "KL";
    case UnlearnMethod::kNpo:
      return "NPO";
    case UnlearnMethod::kTaskVec:
      return "TaskVec";
  }
  return "unknown";
}

UnlearnMethod ParseUnlearnMethod(std::string_view name) {
  for (UnlearnMethod m : kAllUnlearnMethods) {
    if (UnlearnMethodName(m) == name) return m;
  }
  throw UsageError("unknown unlearning method '" + std::string(name) +
                   "' (expected retrain|ga|kl|npo|taskvec)");
}

void UnlearnConfig::Validate() const {
  if (steps > 10000) throw UsageError("unlearn steps must be at most 1e4");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("unlearn learning_rate must be finite and >= 0");
  }
  if (method == UnlearnMethod::kNpo && !(npo_beta > 0.0)) {
    throw UsageError("npo_beta must be positive");
  }
  if (method == UnlearnMethod::kTaskVec &&
      (!(taskvec_lambda >= 0.0) || !std::isfinite(taskvec_lambda))) {
    throw UsageError("taskvec_lambda must be finite and >= 0");
  }
  if (!(retain_weight >= 0.0)) {
    throw UsageError("retain_weight must be nonnegative");
  }
}

ModelParams Retrain(std::span<const Example> remaining,
                    const TrainConfig& config, const ModelParams& init) {
  return Train(config, remaining, init);
}

UnlearnResult GaUnlearn(const ModelParams& original,
                        std::span<const Example> forget,
                        const UnlearnConfig& config) {
  config.Validate();
  RequireForget(forget);
  UnlearnResult result{original, false, 0};
  for (std::uint32_t s = 0; s < config.steps; ++s) {
    ModelParams next = result.params;
    next.head.Axpy(config.learning_rate, SumGradient(next, forget));
    if (Diverged(next, forget)) {
      result.diverged = true;
      break;
    }
    result.params = std::move(next);
    ++result.steps_run;
  }
  return result;
}

double MeanKl(const ModelParams& reference, const ModelParams& params,
              std::span<const Example> examples) {
  if (examples.empty()) throw UsageError("KL over an empty set");
  double total = 0.0;
  for (const Example& ex : examples) {
    const auto p0 = Forward(reference, ex.tokens);
    const auto p = Forward(params, ex.tokens);
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p0[c] > 0.0) total += p0[c] * (LogClamped(p0[c]) - LogClamped(p[c]));
    }
  }
  return total / static_cast<double>(examples.size());
}

double NegKlLoss(const ModelParams& params, const ModelParams& reference,
                 std::span<const Example> forget) {
  return -MeanKl(reference, params, forget) *
         static_cast<double>(forget.size());
}

Head NegKlGradient(const ModelParams& params, const ModelParams& reference,
                   std::span<const Example> forget) {
  RequireForget(forget);
  // d/dz [sum_c p0_c log p_c] = p0 - p, so d(-KL)/dz = p0 - p.
  Head g(params.head.classes(), params.head.dim());
  for (const Example& ex : forget) {
    const Evaluated e = Evaluate(params, ex);
    const auto p0 = Forward(reference, ex.tokens);
    std::vector<double> dz(p0.size());
    for (std::size_t c = 0; c < dz.size(); ++c) dz[c] = p0[c] - e.probs[c];
    g.AddOuter(dz, e.pooled, 1.0);
  }
  return g;
}

UnlearnResult KlUnlearn(const ModelParams& original,
                        std::span<const Example> forget,
                        std::span<const Example> retain,
                        const UnlearnConfig& config) {
  config.Validate();
  RequireForget(forget);
  UnlearnResult result{original, false, 0};
  const bool use_retain = config.retain_weight > 0.0 && !retain.empty();
  for (std::uint32_t s = 0; s < config.steps; ++s) {
    ModelParams next = result.params;
    if (s == 0) {
      next.head.Axpy(config.learning_rate, SumGradient(next, forget));
    } else {
      Head g = NegKlGradient(next, original, forget);
      if (use_retain) g.Axpy(config.retain_weight, Gradient(next, retain));
      next.head.Axpy(-config.learning_rate, g);
    }
    if (Diverged(next, forget)) {
      result.diverged = true;
      break;
    }
    result.params = std::move(next);
    ++result.steps_run;
  }
  return result;
}

double NpoLoss(const ModelParams& params, const ModelParams& reference,
               std::span<const Example> forget, double beta) {
  RequireForget(forget);
  double total = 0.0;
  for (const Example& ex : forget) {
    const double log_r = LogClamped(Forward(params, ex.tokens)[ex.label]) -
                         LogClamped(Forward(reference, ex.tokens)[ex.label]);
    // log(1 + e^x) evaluated stably.
    const double x = beta * log_r;
    const double softplus = x > 0 ? x + std::log1p(std::exp(-x))
                                  : std::log1p(std::exp(x));
    total += 2.0 / beta * softplus;
  }
  return total;
}

Head NpoGradient(const ModelParams& params, const ModelParams& reference,
                 std::span<const Example> forget, double beta) {
  RequireForget(forget);
  Head g(params.head.classes(), params.head.dim());
  for (const Example& ex : forget) {
    const Evaluated e = Evaluate(params, ex);
    const double log_r =
        LogClamped(e.probs[ex.label]) -
        LogClamped(Forward(reference, ex.tokens)[ex.label]);
    // dL/dlog p_y = 2 * sigmoid(beta * log r); dlog p_y/dz = onehot - p.
    const double weight = 2.0 / (1.0 + std::exp(-beta * log_r));
    std::vector<double> dz(e.probs.size());
    for (std::size_t c = 0; c < dz.size(); ++c) {
      dz[c] = -weight * e.probs[c];
    }
    dz[ex.label] += weight;
    g.AddOuter(dz, e.pooled, 1.0);
  }
  return g;
}

UnlearnResult NpoUnlearn(const ModelParams& original,
                         std::span<const Example> forget,
                         const UnlearnConfig& config) {
  config.Validate();
  RequireForget(forget);
  UnlearnResult result{original, false, 0};
  for (std::uint32_t s = 0; s < config.steps; ++s) {
    ModelParams next = result.params;
    next.head.Axpy(-config.learning_rate,
                   NpoGradient(next, original, forget, config.npo_beta));
    if (Diverged(next, forget)) {
      result.diverged = true;
      break;
    }
    result.params = std::move(next);
    ++result.steps_run;
  }
  return result;
}

UnlearnResult TaskVecUnlearn(const ModelParams& original,
                             std::span<const Example> forget,
                             const UnlearnConfig& config) {
  config.Validate();
  RequireForget(forget);
  ModelParams tuned = original;
  for (std::uint32_t s = 0; s < config.steps; ++s) {
    tuned.head.Axpy(-config.learning_rate, SumGradient(tuned, forget));
    if (!tuned.head.AllFinite()) {
      throw NumericDivergenceError("task-vector fine-tuning diverged", s);
    }
  }
  UnlearnResult result{original, false, config.steps};
  result.params.head.Axpy(-config.taskvec_lambda, tuned.head - original.head);
  result.diverged = Diverged(result.params, forget);
  return result;
}

UnlearnResult Unlearn(const UnlearnConfig& config, const ModelParams& original,
                      std::span<const Example> forget,
                      const UnlearnContext& context) {
  switch (config.method) {
    case UnlearnMethod::kRetrain:
      if (context.train_config == nullptr || context.init == nullptr) {
        throw UsageError("retrain needs the training config and init");
      }
      return UnlearnResult{
          Retrain(context.remaining, *context.train_config, *context.init),
          false, context.train_config->epochs};
    case UnlearnMethod::kGa:
      return GaUnlearn(original, forget, config);
    case UnlearnMethod::kKl:
      return KlUnlearn(original, forget, context.remaining, config);
    case UnlearnMethod::kNpo:
      return NpoUnlearn(original, forget, config);
    case UnlearnMethod::kTaskVec:
      return TaskVecUnlearn(original, forget, config);
  }
  throw UsageError("unknown unlearning method");
}

NamedUnlearner MakeUnlearner(const UnlearnConfig& config) {
  config.Validate();
  NamedUnlearner u;
  u.name = std::string(UnlearnMethodName(config.method));
  u.is_retrain = config.method == UnlearnMethod::kRetrain;
  u.run = [config](const ModelParams& original,
                   std::span<const Example> forget,
                   const UnlearnContext& context) {
    return Unlearn(config, original, forget, context);
  };
  return u;
}

NamedUnlearner IdentityUnlearner() {
  NamedUnlearner u;
  u.name = "identity";
  u.run = [](const ModelParams& original, std::span<const Example>,
             const UnlearnContext&) {
    return UnlearnResult{original, false, 0};
  };
  return u;
}

}  // namespace ulab
