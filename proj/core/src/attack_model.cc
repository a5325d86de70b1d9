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

#include "ulab/attack_model.h"

#include <algorithm>
#include <cmath>

#include "ulab/adam.h"
#include "ulab/errors.h"
#include "ulab/rng.h"

namespace ulab {
namespace {

constexpr double kOutputClamp = 1e-12;

double Sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

// Binary cross-entropy from a logit, computed without forming p.
double LogisticLoss(double z, std::uint8_t y) {
  const double softplus = z > 0 ? z + std::log1p(std::exp(-z))
                                 : std::log1p(std::exp(z));
  return softplus - (y ? z : 0.0);
}

}  // namespace

void AttackModelConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("attack-model learning rate must be positive");
  }
  if (max_epochs == 0) throw UsageError("attack model needs at least 1 epoch");
  if (hidden_layer && hidden_units == 0) {
    throw UsageError("hidden layer needs at least one unit");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw UsageError("validation_fraction must lie in (0, 1)");
  }
}

double AttackModel::Logit(std::span<const double> x) const {
  const std::size_t k = mean_.size();
  if (!config_.hidden_layer) {
    double z = params_[k];
    for (std::size_t j = 0; j < k; ++j) z += params_[j] * x[j];
    return z;
  }
  const std::size_t h = config_.hidden_units;
  const double* w1 = params_.data();
  const double* b1 = w1 + h * k;
  const double* w2 = b1 + h;
  double z = w2[h];
  for (std::size_t u = 0; u < h; ++u) {
    double a = b1[u];
    for (std::size_t j = 0; j < k; ++j) a += w1[u * k + j] * x[j];
    z += w2[u] * std::tanh(a);
  }
  return z;
}

double AttackModel::Predict(std::span<const double> feature) const {
  if (feature.size() != mean_.size()) {
    throw UsageError("feature length does not match the attack model");
  }
  std::vector<double> x(feature.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = (feature[j] - mean_[j]) / scale_[j];
  }
  return std::clamp(Sigmoid(Logit(x)), kOutputClamp, 1.0 - kOutputClamp);
}

AttackModel AttackModel::Fit(std::span<const std::vector<double>> features,
                             std::span<const std::uint8_t> labels,
                             const AttackModelConfig& config) {
  config.Validate();
  if (features.size() != labels.size() || features.empty()) {
    throw UsageError("attack model needs matching nonempty features/labels");
  }
  const std::size_t k = features[0].size();
  for (const auto& f : features) {
    if (f.size() != k || k == 0) throw UsageError("ragged attack features");
  }

  // Per-class split so both halves keep the class ratio.
  Rng rng(DeriveSeed(config.seed, "attack-split"));
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  for (std::uint8_t cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    if (idx.size() < 2) {
      throw UsageError("attack model needs two examples of each class");
    }
    rng.Shuffle(std::span<std::size_t>(idx));
    std::size_t n_val = static_cast<std::size_t>(
        std::lround(config.validation_fraction * idx.size()));
    n_val = std::clamp<std::size_t>(n_val, 1, idx.size() - 1);
    val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + n_val);
    train_idx.insert(train_idx.end(), idx.begin() + n_val, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  AttackModel model;
  model.config_ = config;
  model.mean_.assign(k, 0.0);
  model.scale_.assign(k, 1.0);
  for (std::size_t j = 0; j < k; ++j) {
    double m = 0.0;
    for (std::size_t i : train_idx) m += features[i][j];
    m /= static_cast<double>(train_idx.size());
    double ss = 0.0;
    for (std::size_t i : train_idx) {
      ss += (features[i][j] - m) * (features[i][j] - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(train_idx.size()));
    model.mean_[j] = m;
    model.scale_[j] = sd > 1e-12 ? sd : 1.0;
  }
  auto standardized = [&](std::size_t i) {
    std::vector<double> x(k);
    for (std::size_t j = 0; j < k; ++j) {
      x[j] = (features[i][j] - model.mean_[j]) / model.scale_[j];
    }
    return x;
  };
  std::vector<std::vector<double>> xs(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) xs[i] = standardized(i);

  const std::size_t h = config.hidden_units;
  if (!config.hidden_layer) {
    model.params_.assign(k + 1, 0.0);
  } else {
    model.params_.assign(h * k + h + h + 1, 0.0);
    Rng init(DeriveSeed(config.seed, "attack-init"));
    const double s1 = 1.0 / std::sqrt(static_cast<double>(k));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (std::size_t i = 0; i < h * k; ++i) model.params_[i] = init.Normal(0, s1);
    for (std::size_t u = 0; u < h; ++u) {
      model.params_[h * k + h + u] = init.Normal(0, s2);
    }
  }

  auto mean_loss = [&](const std::vector<std::size_t>& idx) {
    double total = 0.0;
    for (std::size_t i : idx) total += LogisticLoss(model.Logit(xs[i]), labels[i]);
    return total / static_cast<double>(idx.size());
  };

  Adam adam(model.params_.size(), config.learning_rate);
  std::vector<double> grad(model.params_.size());
  std::vector<double> best = model.params_;
  double best_loss = mean_loss(val_idx);
  std::uint32_t since_best = 0;
  std::vector<double> act(h);
  for (std::uint32_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double scale = 1.0 / static_cast<double>(train_idx.size());
    for (std::size_t i : train_idx) {
      const std::vector<double>& x = xs[i];
      const double dz = (Sigmoid(model.Logit(x)) - labels[i]) * scale;
      if (!config.hidden_layer) {
        for (std::size_t j = 0; j < k; ++j) grad[j] += dz * x[j];
        grad[k] += dz;
        continue;
      }
      const double* w1 = model.params_.data();
      const double* b1 = w1 + h * k;
      const double* w2 = b1 + h;
      for (std::size_t u = 0; u < h; ++u) {
        double a = b1[u];
        for (std::size_t j = 0; j < k; ++j) a += w1[u * k + j] * x[j];
        act[u] = std::tanh(a);
      }
      for (std::size_t u = 0; u < h; ++u) {
        grad[h * k + h + u] += dz * act[u];
        const double da = dz * w2[u] * (1.0 - act[u] * act[u]);
        for (std::size_t j = 0; j < k; ++j) grad[u * k + j] += da * x[j];
        grad[h * k + u] += da;
      }
      grad[h * k + 2 * h] += dz;
    }
    adam.Step(model.params_, grad);
    model.epochs_run_ = epoch + 1;
    const double val = mean_loss(val_idx);
    if (!std::isfinite(val)) break;
    if (val < best_loss) {
      best_loss = val;
      best = model.params_;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.params_ = std::move(best);
  model.best_validation_loss_ = best_loss;
  return model;
}

}  // namespace ulab
