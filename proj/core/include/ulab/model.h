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

#ifndef ULAB_MODEL_H_
#define ULAB_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ulab {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before any log
// or logit.
inline constexpr double kProbClamp = 1e-12;

// Shapes shared by every model built over one vocabulary.
struct VocabSpec {
  std::uint32_t vocab_size = 4096;
  std::uint32_t embed_dim = 256;
  std::uint32_t seq_len = 16;
  std::uint32_t num_classes = 2;
  // Pooling weight of each position; strictly decreasing, sums to one.
  std::vector<double> pos_weights;

  // Spec with position weights proportional to 1 / (1 + l).
  static VocabSpec Make(std::uint32_t vocab_size, std::uint32_t embed_dim,
                        std::uint32_t seq_len, std::uint32_t num_classes = 2);

  // Throws UsageError when an invariant does not hold.
  void Validate() const;

  bool operator==(const VocabSpec&) const = default;
};

std::vector<double> DefaultPositionWeights(std::size_t seq_len);

struct Example {
  std::vector<std::uint32_t> tokens;
  std::uint32_t label = 0;

  bool operator==(const Example&) const = default;
  auto operator<=>(const Example&) const = default;
};

using Dataset = std::vector<Example>;

// Throws InputDomainError for a wrong length, a token id >= |V| or a label
// >= C.
void ValidateExample(const VocabSpec& spec, const Example& example);

// Frozen |V| x d token embedding table. Rows are drawn from N(0, 1/d) so the
// expected squared row norm is one.
class Embedding {
 public:
  Embedding(std::size_t vocab_size, std::size_t dim, std::vector<double> data);

  static Embedding Random(const VocabSpec& spec, std::uint64_t seed);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t token) const {
    return {data_.data() + token * dim_, dim_};
  }
  std::span<const double> data() const { return data_; }

  // Per-coordinate min and max over all rows.
  std::vector<double> CoordinateMin() const;
  std::vector<double> CoordinateMax() const;
  double MeanRowNorm() const;

  bool operator==(const Embedding&) const = default;

 private:
  std::size_t vocab_size_;
  std::size_t dim_;
  std::vector<double> data_;
};

// The trainable part of a model: a C x d weight matrix followed by a C-vector
// bias, stored contiguously so that gradients, differences and optimizer
// state all share one flat layout.
class Head {
 public:
  Head() = default;
  Head(std::size_t classes, std::size_t dim)
      : classes_(classes), dim_(dim), values_(classes * dim + classes, 0.0) {}

  std::size_t classes() const { return classes_; }
  std::size_t dim() const { return dim_; }

  double& weight(std::size_t c, std::size_t j) { return values_[c * dim_ + j]; }
  double weight(std::size_t c, std::size_t j) const {
    return values_[c * dim_ + j];
  }
  double& bias(std::size_t c) { return values_[classes_ * dim_ + c]; }
  double bias(std::size_t c) const { return values_[classes_ * dim_ + c]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> weight_row(std::size_t c) const {
    return {values_.data() + c * dim_, dim_};
  }

  bool SameShape(const Head& other) const {
    return classes_ == other.classes_ && dim_ == other.dim_;
  }

  double Dot(const Head& other) const;
  double Norm() const;
  bool AllFinite() const;

  // this += scale * other
  Head& Axpy(double scale, const Head& other);
  Head& operator+=(const Head& other) { return Axpy(1.0, other); }
  Head& operator-=(const Head& other) { return Axpy(-1.0, other); }
  Head& operator*=(double scale);

  // this += scale * outer(dlogits, [pooled; 1])
  void AddOuter(std::span<const double> dlogits, std::span<const double> pooled,
                double scale = 1.0);

  bool operator==(const Head&) const = default;

 private:
  std::size_t classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

Head operator+(Head a, const Head& b);
Head operator-(Head a, const Head& b);
Head operator*(double s, Head a);

// Everything needed to evaluate the classifier. Copies share the embedding
// table; only the head differs between models of one family.
struct ModelParams {
  VocabSpec spec;
  std::shared_ptr<const Embedding> embedding;
  Head head;
  std::uint64_t seed = 0;
};

// Fresh model with seeded embeddings and a zero head.
ModelParams InitModel(const VocabSpec& spec, std::uint64_t seed);

// pooled = sum_l w_l * E[token_l]
std::vector<double> Pool(const ModelParams& params,
                         std::span<const std::uint32_t> tokens);
std::vector<double> HeadLogits(const Head& head,
                               std::span<const double> pooled);
std::vector<double> Softmax(std::span<const double> logits);

// Pre-softmax logits W * pooled + b.
std::vector<double> Logits(const ModelParams& params,
                           std::span<const std::uint32_t> tokens);
// Class probabilities softmax(W * pooled + b).
std::vector<double> Forward(const ModelParams& params,
                            std::span<const std::uint32_t> tokens);

enum class ScoreKind { kConfidence, kCrossEntropy, kHingeLogit };

struct Score {
  ScoreKind kind = ScoreKind::kCrossEntropy;
  double value = 0.0;
};

std::string_view ScoreKindName(ScoreKind kind);
ScoreKind ParseScoreKind(std::string_view name);

// Score of the true-label probability p: p, -log p or log(p / (1 - p)).
double ScoreFromProbability(double p, ScoreKind kind);
Score ComputeScore(const ModelParams& params, const Example& example,
                   ScoreKind kind);

enum class LossKind { kCrossEntropy };

// Mean loss and mean gradient over a nonempty batch.
double MeanLoss(const ModelParams& params, std::span<const Example> batch,
                LossKind loss = LossKind::kCrossEntropy);
Head Gradient(const ModelParams& params, std::span<const Example> batch,
              LossKind loss = LossKind::kCrossEntropy);

}  // namespace ulab

#endif  // ULAB_MODEL_H_
