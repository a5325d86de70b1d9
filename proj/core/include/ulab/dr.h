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


#ifndef ULAB_DR_H_
#define ULAB_DR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ulab/model.h"
#include "ulab/unlearn.h"

namespace ulab {

// Continuous stand-in for one unlearned example: L x d embeddings and C
// soft-label logits.
struct Candidate {
  std::size_t seq_len = 0;
  std::size_t dim = 0;
  std::vector<double> x;  // row-major, seq_len x dim
  std::vector<double> y;
  std::uint32_t step_count = 0;

  std::span<const double> row(std::size_t l) const {
    return {x.data() + l * dim, dim};
  }
};

// Per-coordinate bounds of the embedding table.
struct EmbeddingBox {
  std::vector<double> low;
  std::vector<double> up;
};

EmbeddingBox ComputeBox(const Embedding& embedding);

// Elementwise clamp of every row of x into the box; idempotent.
void Clip(Candidate& candidate, const EmbeddingBox& box);

// theta_original - theta_unlearned over the head only. Throws UsageError on
// a shape mismatch.
Head DeltaTheta(const ModelParams& original, const ModelParams& unlearned);

// First-step update direction of `method` at the original weights, evaluated
// on soft candidates with q = softmax(y). GA, KL (whose first step is a
// gradient-ascent kick) and NPO (whose gradient at r = 1 is the CE gradient)
// give +grad CE; TaskVec gives the fine-tuning direction -grad CE. A batch
// uses the mean over candidates. Throws UnsupportedError for retrain.
Head UnlearnDirection(const ModelParams& original,
                      std::span<const Candidate> candidates,
                      UnlearnMethod method);

// The weight difference, signed so that a perfect candidate's direction is
// parallel to it.
Head ReconTarget(const Head& delta, UnlearnMethod method);

struct ReconLossValue {
  double value = 1.0;
  // Direction had zero norm; value is 1 by convention.
  bool degenerate = false;
};

// 1 - cos(UnlearnDirection(candidates), target), in [0, 2].
ReconLossValue ReconLoss(const ModelParams& original,
                         std::span<const Candidate> candidates,
                         const Head& target, UnlearnMethod method);

// (mean_l ||x_l|| - vocab_mean_norm)^2
double RegLoss(const Candidate& candidate, double vocab_mean_norm);

struct LossAndGradient {
  double total = 0.0;
  double rec = 1.0;
  double reg = 0.0;  // mean over candidates
  bool degenerate = false;
  // Shaped like the candidates; holds d total / d x and d total / d y.
  std::vector<Candidate> grad;
};

// total = rec + beta * reg with its analytic gradient.
LossAndGradient TotalLoss(const ModelParams& original,
                          std::span<const Candidate> candidates,
                          const Head& target, UnlearnMethod method,
                          double beta, double vocab_mean_norm);

inline constexpr std::uint32_t kConvergenceWindow = 50;

struct ReconConfig {
  UnlearnMethod method = UnlearnMethod::kGa;
  double alpha = 0.1;
  double beta = 0.1;
  std::uint32_t max_steps = 2000;
  // Stop once the total loss moved by less than this over the last
  // kConvergenceWindow steps.
  double tolerance = 1e-9;
  std::uint32_t batch_size = 1;
  std::uint32_t restarts = 8;
  // Discrete refinement after nearest-neighbour decoding; 0 disables it.
  std::uint32_t beam_width = 4;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Uniform over the box per coordinate; y ~ N(0, 1).
Candidate InitCandidate(const VocabSpec& spec, const EmbeddingBox& box,
                        std::uint64_t seed);

struct OptimizeResult {
  std::vector<Candidate> candidates;
  double rec_loss = 1.0;
  double reg_loss = 0.0;
  double initial_loss = 0.0;
  std::uint32_t steps = 0;
  bool reinitialized = false;
  bool aborted = false;
  std::vector<std::string> diagnostics;
};

// Adaptive-moment descent on rec + beta * reg, jointly over one candidate
// per seed, clipping x after every step. A non-finite loss re-initializes
// once from derived seeds, then aborts. Permuting the seeds permutes the
// output.
OptimizeResult BatchOptimize(const ModelParams& original, const Head& delta,
                             const ReconConfig& config,
                             std::span<const std::uint64_t> candidate_seeds);

OptimizeResult Optimize(const ModelParams& original, const Head& delta,
                        const ReconConfig& config, std::uint64_t seed);

struct DecodedText {
  std::vector<std::uint32_t> tokens;
  std::uint32_t label = 0;

  bool operator==(const DecodedText&) const = default;
  auto operator<=>(const DecodedText&) const = default;
};

// Nearest embedding row per position (ties to the lowest id); label is
// argmax y.
DecodedText Decode(const Candidate& candidate, const Embedding& embedding);

// Embeds decoded text back into a candidate with a sharp soft label.
Candidate EmbedDecoded(const DecodedText& text, const ModelParams& model);

// Reconstruction loss of discrete texts (x rows are embedding rows, q is
// one-hot).
double DiscreteReconLoss(const ModelParams& original,
                         std::span<const DecodedText> texts,
                         const Head& target, UnlearnMethod method);

// Beam coordinate search over tokens and labels that lowers the discrete
// reconstruction loss, starting from `start`. Positions are visited in order
// of decreasing pooling weight; sweeps repeat while the loss improves.
std::vector<DecodedText> RefineTokens(const ModelParams& original,
                                      const Head& target, UnlearnMethod method,
                                      std::span<const DecodedText> start,
                                      std::uint32_t beam_width);

struct ReconResult {
  std::vector<DecodedText> decoded;
  double rec_loss = 1.0;
  double reg_loss = 0.0;
  std::uint32_t best_restart = 0;
  std::vector<double> restart_losses;
  std::uint32_t steps = 0;
  bool no_signal = false;
  std::vector<std::string> diagnostics;
};

// Full attack: restarts x (optimize, decode, refine), keeping the restart
// with the lowest final reconstruction loss.
ReconResult Reconstruct(const ModelParams& original,
                        const ModelParams& unlearned, const ReconConfig& config,
                        std::size_t parallelism = 1);

struct RougeTriple {
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;
};

// Matches decoded texts to ground truth by the assignment maximizing summed
// ROUGE-1 and returns the mean scores over matched pairs. Sizes must agree
// and be at most 16.
RougeTriple ScoreReconstruction(std::span<const DecodedText> decoded,
                                std::span<const Example> truth,
                                std::vector<std::size_t>* assignment = nullptr);

// Mean ROUGE of uniformly random token sequences against the ground truth.
RougeTriple RandomBaselineRouge(std::span<const Example> truth,
                                std::uint32_t vocab_size, std::uint32_t draws,
                                std::uint64_t seed);

}  // namespace ulab

#endif  // ULAB_DR_H_
