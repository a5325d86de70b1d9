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

#include "ulab/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ulab/errors.h"
#include "ulab/rng.h"

namespace ulab {

std::vector<double> DefaultPositionWeights(std::size_t seq_len) {
  std::vector<double> w(seq_len);
  for (std::size_t l = 0; l < seq_len; ++l) w[l] = 1.0 / (1.0 + l);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

VocabSpec VocabSpec::Make(std::uint32_t vocab_size, std::uint32_t embed_dim,
                          std::uint32_t seq_len, std::uint32_t num_classes) {
  VocabSpec spec;
  spec.vocab_size = vocab_size;
  spec.embed_dim = embed_dim;
  spec.seq_len = seq_len;
  spec.num_classes = num_classes;
  spec.pos_weights = DefaultPositionWeights(seq_len);
  return spec;
}

void VocabSpec::Validate() const {
  if (vocab_size < 4) throw UsageError("vocab size must be at least 4");
  if (embed_dim == 0) throw UsageError("embed_dim must be positive");
  if (seq_len == 0) throw UsageError("seq_len must be positive");
  if (num_classes < 2) throw UsageError("num_classes must be at least 2");
  if (pos_weights.size() != seq_len) {
    throw UsageError("pos_weights must have seq_len entries");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < pos_weights.size(); ++l) {
    if (!(pos_weights[l] > 0.0)) {
      throw UsageError("pos_weights must be positive");
    }
    if (l > 0 && !(pos_weights[l] < pos_weights[l - 1])) {
      throw UsageError("pos_weights must be strictly decreasing");
    }
    total += pos_weights[l];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw UsageError("pos_weights must sum to 1");
  }
}

void ValidateExample(const VocabSpec& spec, const Example& example) {
  if (example.tokens.size() != spec.seq_len) {
    throw InputDomainError("example has " +
                           std::to_string(example.tokens.size()) +
                           " tokens, expected " +
                           std::to_string(spec.seq_len));
  }
  for (std::uint32_t t : example.tokens) {
    if (t >= spec.vocab_size) {
      throw InputDomainError("token id " + std::to_string(t) +
                             " out of range");
    }
  }
  if (example.label >= spec.num_classes) {
    throw InputDomainError("label " + std::to_string(example.label) +
                           " out of range");
  }
}

Embedding::Embedding(std::size_t vocab_size, std::size_t dim,
                     std::vector<double> data)
    : vocab_size_(vocab_size), dim_(dim), data_(std::move(data)) {
  if (data_.size() != vocab_size_ * dim_) {
    throw UsageError("embedding data size does not match shape");
  }
}

Embedding Embedding::Random(const VocabSpec& spec, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "embedding"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.embed_dim));
  std::vector<double> data(std::size_t{spec.vocab_size} * spec.embed_dim);
  for (double& x : data) x = scale * rng.Normal();
  return Embedding(spec.vocab_size, spec.embed_dim, std::move(data));
}

std::vector<double> Embedding::CoordinateMin() const {
  std::vector<double> lo(row(0).begin(), row(0).end());
  for (std::size_t v = 1; v < vocab_size_; ++v) {
    auto r = row(v);
    for (std::size_t j = 0; j < dim_; ++j) lo[j] = std::min(lo[j], r[j]);
  }
  return lo;
}

std::vector<double> Embedding::CoordinateMax() const {
  std::vector<double> hi(row(0).begin(), row(0).end());
  for (std::size_t v = 1; v < vocab_size_; ++v) {
    auto r = row(v);
    for (std::size_t j = 0; j < dim_; ++j) hi[j] = std::max(hi[j], r[j]);
  }
  return hi;
}

double Embedding::MeanRowNorm() const {
  double total = 0.0;
  for (std::size_t v = 0; v < vocab_size_; ++v) {
    double sq = 0.0;
    for (double x : row(v)) sq += x * x;
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(vocab_size_);
}

double Head::Dot(const Head& other) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    s += values_[i] * other.values_[i];
  }
  return s;
}

double Head::Norm() const { return std::sqrt(Dot(*this)); }

bool Head::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

Head& Head::Axpy(double scale, const Head& other) {
  if (!SameShape(other)) throw UsageError("head shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += scale * other.values_[i];
  }
  return *this;
}

Head& Head::operator*=(double scale) {
  for (double& x : values_) x *= scale;
  return *this;
}

void Head::AddOuter(std::span<const double> dlogits,
                    std::span<const double> pooled, double scale) {
  for (std::size_t c = 0; c < classes_; ++c) {
    const double g = scale * dlogits[c];
    double* row = values_.data() + c * dim_;
    for (std::size_t j = 0; j < dim_; ++j) row[j] += g * pooled[j];
    values_[classes_ * dim_ + c] += g;
  }
}

Head operator+(Head a, const Head& b) { return a += b; }
Head operator-(Head a, const Head& b) { return a -= b; }
Head operator*(double s, Head a) { return a *= s; }

ModelParams InitModel(const VocabSpec& spec, std::uint64_t seed) {
  spec.Validate();
  ModelParams params;
  params.spec = spec;
  params.embedding =
      std::make_shared<const Embedding>(Embedding::Random(spec, seed));
  params.head = Head(spec.num_classes, spec.embed_dim);
  params.seed = seed;
  return params;
}

std::vector<double> Pool(const ModelParams& params,
                         std::span<const std::uint32_t> tokens) {
  const VocabSpec& spec = params.spec;
  if (tokens.size() != spec.seq_len) {
    throw InputDomainError("expected " + std::to_string(spec.seq_len) +
                           " tokens, got " + std::to_string(tokens.size()));
  }
  std::vector<double> pooled(spec.embed_dim, 0.0);
  for (std::size_t l = 0; l < tokens.size(); ++l) {
    if (tokens[l] >= spec.vocab_size) {
      throw InputDomainError("token id " + std::to_string(tokens[l]) +
                             " out of range");
    }
    const double w = spec.pos_weights[l];
    auto row = params.embedding->row(tokens[l]);
    for (std::size_t j = 0; j < pooled.size(); ++j) pooled[j] += w * row[j];
  }
  return pooled;
}

std::vector<double> HeadLogits(const Head& head,
                               std::span<const double> pooled) {
  std::vector<double> z(head.classes());
  for (std::size_t c = 0; c < z.size(); ++c) {
    auto w = head.weight_row(c);
    double s = head.bias(c);
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * pooled[j];
    z[c] = s;
  }
  return z;
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double m = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - m);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<double> Logits(const ModelParams& params,
                           std::span<const std::uint32_t> tokens) {
  return HeadLogits(params.head, Pool(params, tokens));
}

std::vector<double> Forward(const ModelParams& params,
                            std::span<const std::uint32_t> tokens) {
  return Softmax(Logits(params, tokens));
}

std::string_view ScoreKindName(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kConfidence:
      return "confidence";
    case ScoreKind::kCrossEntropy:
      return "cross-entropy";
    case ScoreKind::kHingeLogit:
      return "hinge-logit";
  }
  return "unknown";
}

ScoreKind ParseScoreKind(std::string_view name) {
  if (name == "confidence") return ScoreKind::kConfidence;
  if (name == "cross-entropy") return ScoreKind::kCrossEntropy;
  if (name == "hinge-logit") return ScoreKind::kHingeLogit;
  throw UsageError("unknown score kind '" + std::string(name) + "'");
}

double ScoreFromProbability(double p, ScoreKind kind) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  switch (kind) {
    case ScoreKind::kConfidence:
      return p;
    case ScoreKind::kCrossEntropy:
      return -std::log(q);
    case ScoreKind::kHingeLogit:
      return std::log(q) - std::log1p(-q);
  }
  return 0.0;
}

Score ComputeScore(const ModelParams& params, const Example& example,
                   ScoreKind kind) {
  if (example.label >= params.spec.num_classes) {
    throw InputDomainError("label out of range");
  }
  const auto p = Forward(params, example.tokens);
  return Score{kind, ScoreFromProbability(p[example.label], kind)};
}

double MeanLoss(const ModelParams& params, std::span<const Example> batch,
                LossKind /*loss*/) {
  if (batch.empty()) throw UsageError("loss of an empty batch");
  double total = 0.0;
  for (const Example& ex : batch) {
    total += ComputeScore(params, ex, ScoreKind::kCrossEntropy).value;
  }
  return total / static_cast<double>(batch.size());
}

Head Gradient(const ModelParams& params, std::span<const Example> batch,
              LossKind /*loss*/) {
  if (batch.empty()) throw UsageError("gradient of an empty batch");
  Head g(params.head.classes(), params.head.dim());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Example& ex : batch) {
    if (ex.label >= params.spec.num_classes) {
      throw InputDomainError("label out of range");
    }
    const auto pooled = Pool(params, ex.tokens);
    auto dz = Softmax(HeadLogits(params.head, pooled));
    dz[ex.label] -= 1.0;
    g.AddOuter(dz, pooled, scale);
  }
  return g;
}

}  // namespace ulab
