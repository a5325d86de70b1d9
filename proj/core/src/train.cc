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

#include "ulab/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ulab/adam.h"
#include "ulab/errors.h"
#include "ulab/rng.h"

namespace ulab {

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kPlainGradient ? "plain-gradient"
                                               : "adaptive-moment";
}

OptimizerKind ParseOptimizer(std::string_view name) {
  if (name == "plain-gradient") return OptimizerKind::kPlainGradient;
  if (name == "adaptive-moment") return OptimizerKind::kAdaptiveMoment;
  throw UsageError("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || learning_rate > 10.0) {
    throw UsageError("learning_rate must lie in (0, 10]");
  }
  if (epochs > 100000) throw UsageError("epochs must be at most 1e5");
  if (batch_size == 0) throw UsageError("batch_size must be positive");
}

ModelParams Train(const TrainConfig& config, std::span<const Example> data,
                  const ModelParams& init) {
  config.Validate();
  if (data.empty()) throw UsageError("cannot train on an empty dataset");
  ModelParams model = init;
  if (config.epochs == 0) return model;

  const std::size_t n = data.size();
  const std::size_t dim = model.spec.embed_dim;
  const std::size_t classes = model.spec.num_classes;

  // The embedding is frozen, so pooled features are computed once.
  std::vector<double> pooled(n * dim);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    ValidateExample(model.spec, data[i]);
    auto p = Pool(model, data[i].tokens);
    std::copy(p.begin(), p.end(), pooled.begin() + i * dim);
    labels[i] = data[i].label;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min<std::size_t>(config.batch_size, n);
  Rng rng(DeriveSeed(config.seed, "train-order"));
  Adam adam(model.head.values().size(), config.learning_rate);
  Head grad(classes, dim);
  std::vector<double> z(classes);
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < n) rng.Shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      const double* w = model.head.values().data();
      double* g = grad.values().data();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const double* h = pooled.data() + i * dim;
        double zmax = -INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
          const double* wc = w + c * dim;
          double s = w[classes * dim + c];
          for (std::size_t j = 0; j < dim; ++j) s += wc[j] * h[j];
          z[c] = s;
          zmax = std::max(zmax, s);
        }
        double total = 0.0;
        for (double& x : z) {
          x = x == zmax ? 1.0 : std::exp(x - zmax);
          total += x;
        }
        const double inv = scale / total;
        for (std::size_t c = 0; c < classes; ++c) {
          double dz = z[c] * inv;
          if (c == labels[i]) dz -= scale;
          double* gc = g + c * dim;
          for (std::size_t j = 0; j < dim; ++j) gc[j] += dz * h[j];
          g[classes * dim + c] += dz;
        }
      }
      if (config.optimizer == OptimizerKind::kAdaptiveMoment) {
        adam.Step(model.head.values(), grad.values());
      } else {
        model.head.Axpy(-config.learning_rate, grad);
      }
    }
    // With clamped probabilities the loss is finite iff the weights are.
    if (!model.head.AllFinite()) {
      throw NumericDivergenceError("training loss became non-finite", epoch);
    }
  }
  return model;
}

}  // namespace ulab
