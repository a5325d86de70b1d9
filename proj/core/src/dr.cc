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


#include "ulab/dr.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "ulab/adam.h"
#include "ulab/errors.h"
#include "ulab/rng.h"
#include "ulab/rouge.h"
#include "ulab/scheduler.h"

namespace ulab {
namespace {

// +1 when the method's first step moves along +grad CE, -1 for TaskVec.
double DirectionSign(UnlearnMethod method) {
  switch (method) {
    case UnlearnMethod::kGa:
    case UnlearnMethod::kKl:
    case UnlearnMethod::kNpo:
      return 1.0;
    case UnlearnMethod::kTaskVec:
      return -1.0;
    case UnlearnMethod::kRetrain:
      break;
  }
  throw UnsupportedError(
      "retraining has no gradient surrogate to reconstruct from");
}

void RequireShape(const ModelParams& model, const Candidate& c) {
  const VocabSpec& s = model.spec;
  if (c.seq_len != s.seq_len || c.dim != s.embed_dim ||
      c.x.size() != c.seq_len * c.dim || c.y.size() != s.num_classes) {
    throw UsageError("candidate shape does not match the model");
  }
}

std::vector<double> PoolRows(const VocabSpec& spec, const Candidate& c) {
  std::vector<double> h(c.dim, 0.0);
  for (std::size_t l = 0; l < c.seq_len; ++l) {
    const double w = spec.pos_weights[l];
    const auto r = c.row(l);
    for (std::size_t j = 0; j < c.dim; ++j) h[j] += w * r[j];
  }
  return h;
}

// Forward quantities of one candidate under the surrogate.
struct Pieces {
  std::vector<double> h;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> delta;  // sign * (p - q)
};

Pieces Evaluate(const ModelParams& model, const Candidate& c, double sign) {
  Pieces e;
  e.h = PoolRows(model.spec, c);
  e.p = Softmax(HeadLogits(model.head, e.h));
  e.q = Softmax(c.y);
  e.delta.resize(e.p.size());
  for (std::size_t k = 0; k < e.p.size(); ++k) {
    e.delta[k] = sign * (e.p[k] - e.q[k]);
  }
  return e;
}

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double MeanRowNorm(const Candidate& c) {
  double total = 0.0;
  for (std::size_t l = 0; l < c.seq_len; ++l) total += Norm(c.row(l));
  return total / static_cast<double>(c.seq_len);
}

// y'(z) for softmax output s applied to an upstream gradient g:
// (diag(s) - s s^T) g.
std::vector<double> SoftmaxBackward(std::span<const double> s,
                                    std::span<const double> g) {
  double dot = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) dot += s[k] * g[k];
  std::vector<double> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k] * (g[k] - dot);
  return out;
}

// Cosine loss pieces shared by continuous and discrete evaluation.
double CosineLoss(double dot, double norm_u, double norm_t) {
  if (!(norm_u > 0.0)) return 1.0;
  return 1.0 - std::clamp(dot / (norm_u * norm_t), -1.0, 1.0);
}

}  // namespace

EmbeddingBox ComputeBox(const Embedding& embedding) {
  return {embedding.CoordinateMin(), embedding.CoordinateMax()};
}

void Clip(Candidate& candidate, const EmbeddingBox& box) {
  if (box.low.size() != candidate.dim || box.up.size() != candidate.dim) {
    throw UsageError("box dimension does not match the candidate");
  }
  for (std::size_t l = 0; l < candidate.seq_len; ++l) {
    double* r = candidate.x.data() + l * candidate.dim;
    for (std::size_t j = 0; j < candidate.dim; ++j) {
      r[j] = std::min(std::max(r[j], box.low[j]), box.up[j]);
    }
  }
}

Head DeltaTheta(const ModelParams& original, const ModelParams& unlearned) {
  if (!original.head.SameShape(unlearned.head)) {
    throw UsageError("models differ in head shape");
  }
  return original.head - unlearned.head;
}

Head UnlearnDirection(const ModelParams& original,
                      std::span<const Candidate> candidates,
                      UnlearnMethod method) {
  const double sign = DirectionSign(method);
  if (candidates.empty()) throw UsageError("no candidates");
  Head u(original.spec.num_classes, original.spec.embed_dim);
  const double scale = 1.0 / static_cast<double>(candidates.size());
  for (const Candidate& c : candidates) {
    RequireShape(original, c);
    const Pieces e = Evaluate(original, c, sign);
    u.AddOuter(e.delta, e.h, scale);
  }
  return u;
}

Head ReconTarget(const Head& delta, UnlearnMethod method) {
  // GA-like updates add lr * grad, so delta = -lr * grad; TaskVec's negated
  // fine-tuning gives delta = -lambda * lr * grad against direction -grad.
  return DirectionSign(method) > 0 ? -1.0 * delta : delta;
}

ReconLossValue ReconLoss(const ModelParams& original,
                         std::span<const Candidate> candidates,
                         const Head& target, UnlearnMethod method) {
  const double nt = target.Norm();
  if (!(nt > 0.0)) throw UsageError("reconstruction target is zero");
  const Head u = UnlearnDirection(original, candidates, method);
  const double nu = u.Norm();
  ReconLossValue v;
  v.degenerate = !(nu > 0.0);
  v.value = CosineLoss(u.Dot(target), nu, nt);
  return v;
}

double RegLoss(const Candidate& candidate, double vocab_mean_norm) {
  const double gap = MeanRowNorm(candidate) - vocab_mean_norm;
  return gap * gap;
}

LossAndGradient TotalLoss(const ModelParams& original,
                          std::span<const Candidate> candidates,
                          const Head& target, UnlearnMethod method,
                          double beta, double vocab_mean_norm) {
  const double sign = DirectionSign(method);
  const double nt = target.Norm();
  if (!(nt > 0.0)) throw UsageError("reconstruction target is zero");
  if (candidates.empty()) throw UsageError("no candidates");
  const std::size_t n = candidates.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t dim = original.spec.embed_dim;
  const std::size_t classes = original.spec.num_classes;

  std::vector<Pieces> pieces;
  Head u(classes, dim);
  for (const Candidate& c : candidates) {
    RequireShape(original, c);
    pieces.push_back(Evaluate(original, c, sign));
    u.AddOuter(pieces.back().delta, pieces.back().h, inv_n);
  }
  const double nu = u.Norm();
  const double dot = u.Dot(target);

  LossAndGradient out;
  out.degenerate = !(nu > 0.0);
  out.rec = CosineLoss(dot, nu, nt);
  out.grad.reserve(n);
  for (const Candidate& c : candidates) {
    Candidate g = c;
    std::fill(g.x.begin(), g.x.end(), 0.0);
    std::fill(g.y.begin(), g.y.end(), 0.0);
    out.grad.push_back(std::move(g));
  }

  if (!out.degenerate) {
    // dL/du = -(t / (|u||t|) - <u,t> u / (|u|^3 |t|))
    Head gu = (-1.0 / (nu * nt)) * target;
    gu.Axpy(dot / (nu * nu * nu * nt), u);
    for (std::size_t b = 0; b < n; ++b) {
      const Pieces& e = pieces[b];
      std::vector<double> d_delta(classes);
      for (std::size_t k = 0; k < classes; ++k) {
        double s = gu.bias(k);
        const auto w = gu.weight_row(k);
        for (std::size_t j = 0; j < dim; ++j) s += w[j] * e.h[j];
        d_delta[k] = s * inv_n;
      }
      std::vector<double> dh(dim, 0.0);
      for (std::size_t k = 0; k < classes; ++k) {
        const auto w = gu.weight_row(k);
        for (std::size_t j = 0; j < dim; ++j) {
          dh[j] += w[j] * e.delta[k] * inv_n;
        }
      }
      std::vector<double> dp(classes);
      std::vector<double> dq(classes);
      for (std::size_t k = 0; k < classes; ++k) {
        dp[k] = sign * d_delta[k];
        dq[k] = -sign * d_delta[k];
      }
      const auto dz = SoftmaxBackward(e.p, dp);
      for (std::size_t k = 0; k < classes; ++k) {
        const auto w = original.head.weight_row(k);
        for (std::size_t j = 0; j < dim; ++j) dh[j] += w[j] * dz[k];
      }
      Candidate& g = out.grad[b];
      g.y = SoftmaxBackward(e.q, dq);
      for (std::size_t l = 0; l < g.seq_len; ++l) {
        const double w = original.spec.pos_weights[l];
        for (std::size_t j = 0; j < dim; ++j) g.x[l * dim + j] = w * dh[j];
      }
    }
  }

  out.reg = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const Candidate& c = candidates[b];
    const double gap = MeanRowNorm(c) - vocab_mean_norm;
    out.reg += gap * gap * inv_n;
    if (beta == 0.0) continue;
    const double coeff =
        beta * inv_n * 2.0 * gap / static_cast<double>(c.seq_len);
    for (std::size_t l = 0; l < c.seq_len; ++l) {
      const double norm = Norm(c.row(l));
      if (norm == 0.0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        out.grad[b].x[l * dim + j] += coeff * c.x[l * dim + j] / norm;
      }
    }
  }
  out.total = out.rec + beta * out.reg;
  return out;
}

void ReconConfig::Validate() const {
  DirectionSign(method);
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw UsageError("alpha must be finite and nonnegative");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw UsageError("beta must be finite and nonnegative");
  }
  if (batch_size == 0) throw UsageError("batch_size must be at least 1");
  if (batch_size > 16) throw UsageError("batch_size must be at most 16");
  if (restarts == 0) throw UsageError("restarts must be at least 1");
  if (!(tolerance >= 0.0)) throw UsageError("tolerance must be nonnegative");
}

Candidate InitCandidate(const VocabSpec& spec, const EmbeddingBox& box,
                        std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "dr-init"));
  Candidate c;
  c.seq_len = spec.seq_len;
  c.dim = spec.embed_dim;
  c.x.resize(c.seq_len * c.dim);
  for (std::size_t l = 0; l < c.seq_len; ++l) {
    for (std::size_t j = 0; j < c.dim; ++j) {
      c.x[l * c.dim + j] = rng.Uniform(box.low[j], box.up[j]);
    }
  }
  c.y.resize(spec.num_classes);
  for (double& v : c.y) v = rng.Normal();
  return c;
}

OptimizeResult BatchOptimize(const ModelParams& original, const Head& delta,
                             const ReconConfig& config,
                             std::span<const std::uint64_t> candidate_seeds) {
  config.Validate();
  if (candidate_seeds.empty()) throw UsageError("no candidate seeds");
  OptimizeResult result;
  if (!(delta.Norm() > 0.0)) {
    result.aborted = true;
    result.diagnostics.push_back("no signal: the weight difference is zero");
    return result;
  }
  const Head target = ReconTarget(delta, config.method);
  const EmbeddingBox box = ComputeBox(*original.embedding);
  const double mean_norm = original.embedding->MeanRowNorm();

  // Work in seed order so the trajectory does not depend on how the caller
  // ordered the seeds.
  const std::size_t n = candidate_seeds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return candidate_seeds[a] < candidate_seeds[b];
  });

  std::vector<Candidate> cands;
  for (int attempt = 0; attempt < 2; ++attempt) {
    cands.clear();
    for (std::size_t i : order) {
      const std::uint64_t s = attempt == 0 ? candidate_seeds[i]
                                           : SplitMix64(candidate_seeds[i]);
      cands.push_back(InitCandidate(original.spec, box, s));
    }
    std::size_t size = 0;
    for (const Candidate& c : cands) size += c.x.size() + c.y.size();
    Adam adam(size, config.alpha);
    std::vector<double> params(size);
    std::vector<double> grad(size);
    std::vector<double> history;
    bool finite = true;
    std::uint32_t step = 0;
    // Sign-like adaptive-moment steps overshoot often, so the lowest-loss
    // iterate is kept rather than the last one.
    std::vector<Candidate> best = cands;
    double best_loss = INFINITY;
    for (; step < config.max_steps; ++step) {
      const LossAndGradient lg =
          TotalLoss(original, cands, target, config.method, config.beta,
                    mean_norm);
      if (!std::isfinite(lg.total)) {
        finite = false;
        break;
      }
      if (step == 0) result.initial_loss = lg.total;
      if (lg.total < best_loss) {
        best_loss = lg.total;
        best = cands;
      }
      history.push_back(lg.total);
      if (history.size() > kConvergenceWindow &&
          std::abs(history.back() - history[history.size() - 1 -
                                            kConvergenceWindow]) <
              config.tolerance) {
        break;
      }
      std::size_t k = 0;
      for (std::size_t b = 0; b < n; ++b) {
        for (double v : cands[b].x) params[k++] = v;
        for (double v : cands[b].y) params[k++] = v;
      }
      k = 0;
      for (std::size_t b = 0; b < n; ++b) {
        for (double v : lg.grad[b].x) grad[k++] = v;
        for (double v : lg.grad[b].y) grad[k++] = v;
      }
      adam.Step(params, grad);
      k = 0;
      for (std::size_t b = 0; b < n; ++b) {
        for (double& v : cands[b].x) v = params[k++];
        for (double& v : cands[b].y) v = params[k++];
        Clip(cands[b], box);
        ++cands[b].step_count;
      }
    }
    result.steps = step;
    if (finite) {
      const LossAndGradient last = TotalLoss(
          original, cands, target, config.method, config.beta, mean_norm);
      if (!(last.total <= best_loss)) cands = std::move(best);
      break;
    }
    if (attempt == 0) {
      result.reinitialized = true;
      result.diagnostics.push_back(
          "non-finite loss; re-initialized from the next seed");
      continue;
    }
    result.aborted = true;
    result.diagnostics.push_back("non-finite loss after re-initialization");
  }
  for (Candidate& c : cands) Clip(c, box);
  const LossAndGradient final_loss = TotalLoss(
      original, cands, target, config.method, config.beta, mean_norm);
  result.rec_loss = final_loss.rec;
  result.reg_loss = final_loss.reg;
  if (final_loss.degenerate) {
    result.diagnostics.push_back("degenerate direction at the final iterate");
  }
  result.candidates.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    result.candidates[order[r]] = std::move(cands[r]);
  }
  return result;
}

OptimizeResult Optimize(const ModelParams& original, const Head& delta,
                        const ReconConfig& config, std::uint64_t seed) {
  return BatchOptimize(original, delta, config,
                       std::span<const std::uint64_t>(&seed, 1));
}

DecodedText Decode(const Candidate& candidate, const Embedding& embedding) {
  if (candidate.dim != embedding.dim()) {
    throw UsageError("candidate and embedding dimensions differ");
  }
  DecodedText out;
  for (std::size_t l = 0; l < candidate.seq_len; ++l) {
    const auto r = candidate.row(l);
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < embedding.vocab_size(); ++v) {
      const auto e = embedding.row(v);
      double d = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) {
        d += (r[j] - e[j]) * (r[j] - e[j]);
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint32_t>(v);
      }
    }
    out.tokens.push_back(best);
  }
  out.label = static_cast<std::uint32_t>(
      std::max_element(candidate.y.begin(), candidate.y.end()) -
      candidate.y.begin());
  return out;
}

Candidate EmbedDecoded(const DecodedText& text, const ModelParams& model) {
  Candidate c;
  c.seq_len = model.spec.seq_len;
  c.dim = model.spec.embed_dim;
  if (text.tokens.size() != c.seq_len) {
    throw UsageError("decoded text has the wrong length");
  }
  for (std::uint32_t t : text.tokens) {
    const auto r = model.embedding->row(t);
    c.x.insert(c.x.end(), r.begin(), r.end());
  }
  c.y.assign(model.spec.num_classes, 0.0);
  c.y.at(text.label) = 50.0;
  return c;
}

namespace {

// Discrete search state: texts with their pooled vectors.
struct BeamState {
  std::vector<DecodedText> texts;
  std::vector<std::vector<double>> pooled;
  double loss = 1.0;
};

class DiscreteObjective {
 public:
  DiscreteObjective(const ModelParams& model, const Head& target,
                    UnlearnMethod method, std::size_t batch)
      : model_(model),
        target_(target),
        sign_(DirectionSign(method)),
        inv_n_(1.0 / static_cast<double>(batch)),
        norm_t_(target.Norm()) {
    if (!(norm_t_ > 0.0)) throw UsageError("reconstruction target is zero");
  }

  std::vector<double> PoolTokens(const DecodedText& text) const {
    const std::size_t dim = model_.spec.embed_dim;
    std::vector<double> h(dim, 0.0);
    for (std::size_t l = 0; l < text.tokens.size(); ++l) {
      const auto r = model_.embedding->row(text.tokens.at(l));
      for (std::size_t j = 0; j < dim; ++j) {
        h[j] += model_.spec.pos_weights[l] * r[j];
      }
    }
    return h;
  }

  // sign * (p - onehot(label))
  std::vector<double> Delta(std::span<const double> h,
                            std::uint32_t label) const {
    auto d = Softmax(HeadLogits(model_.head, h));
    d.at(label) -= 1.0;
    for (double& v : d) v *= sign_;
    return d;
  }

  Head Direction(const BeamState& s) const {
    Head u(model_.spec.num_classes, model_.spec.embed_dim);
    for (std::size_t b = 0; b < s.texts.size(); ++b) {
      u.AddOuter(Delta(s.pooled[b], s.texts[b].label), s.pooled[b], inv_n_);
    }
    return u;
  }

  double Loss(const BeamState& s) const {
    const Head u = Direction(s);
    return CosineLoss(u.Dot(target_), u.Norm(), norm_t_);
  }

  // Loss after replacing candidate b's (pooled, delta) given the direction
  // u_rest of every other candidate.
  double LossWith(const Head& u_rest, double dot_rest, double sq_rest,
                  std::span<const double> h,
                  std::span<const double> delta) const {
    const std::size_t classes = model_.spec.num_classes;
    double dot = dot_rest;
    double cross = 0.0;
    double dd = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      double ta = target_.bias(k);
      double ua = u_rest.bias(k);
      const auto tw = target_.weight_row(k);
      const auto uw = u_rest.weight_row(k);
      for (std::size_t j = 0; j < h.size(); ++j) {
        ta += tw[j] * h[j];
        ua += uw[j] * h[j];
      }
      dot += inv_n_ * delta[k] * ta;
      cross += delta[k] * ua;
      dd += delta[k] * delta[k];
    }
    double aa = 1.0;
    for (double x : h) aa += x * x;
    const double sq = sq_rest + 2.0 * inv_n_ * cross + inv_n_ * inv_n_ * dd * aa;
    return CosineLoss(dot, std::sqrt(std::max(sq, 0.0)), norm_t_);
  }

  const ModelParams& model() const { return model_; }
  double inv_n() const { return inv_n_; }
  const Head& target() const { return target_; }

 private:
  const ModelParams& model_;
  const Head& target_;
  double sign_;
  double inv_n_;
  double norm_t_;
};

}  // namespace

double DiscreteReconLoss(const ModelParams& original,
                         std::span<const DecodedText> texts,
                         const Head& target, UnlearnMethod method) {
  if (texts.empty()) throw UsageError("no texts");
  const DiscreteObjective obj(original, target, method, texts.size());
  BeamState s;
  for (const DecodedText& t : texts) {
    ValidateExample(original.spec, Example{t.tokens, t.label});
    s.texts.push_back(t);
    s.pooled.push_back(obj.PoolTokens(t));
  }
  return obj.Loss(s);
}

std::vector<DecodedText> RefineTokens(const ModelParams& original,
                                      const Head& target, UnlearnMethod method,
                                      std::span<const DecodedText> start,
                                      std::uint32_t beam_width) {
  if (start.empty()) throw UsageError("no texts to refine");
  if (beam_width == 0) return {start.begin(), start.end()};
  const DiscreteObjective obj(original, target, method, start.size());
  const VocabSpec& spec = original.spec;
  const std::size_t dim = spec.embed_dim;
  const std::size_t vocab = spec.vocab_size;

  BeamState init;
  for (const DecodedText& t : start) {
    ValidateExample(spec, Example{t.tokens, t.label});
    init.texts.push_back(t);
    init.pooled.push_back(obj.PoolTokens(t));
  }
  init.loss = obj.Loss(init);
  std::vector<BeamState> beam{init};

  struct Move {
    double loss;
    std::size_t state;
    std::uint32_t value;
  };
  // Keeps the best distinct successor states.
  auto select = [&](std::vector<Move>& moves, auto apply) {
    std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) {
      if (a.loss != b.loss) return a.loss < b.loss;
      if (a.state != b.state) return a.state < b.state;
      return a.value < b.value;
    });
    std::vector<BeamState> next;
    for (const Move& m : moves) {
      if (next.size() == beam_width) break;
      BeamState s = apply(beam[m.state], m.value);
      s.loss = m.loss;
      const bool seen = std::any_of(next.begin(), next.end(),
                                    [&](const BeamState& o) {
                                      return o.texts == s.texts;
                                    });
      if (!seen) next.push_back(std::move(s));
    }
    beam = std::move(next);
  };

  const std::size_t n = start.size();
  double best = init.loss;
  std::vector<double> h(dim);
  for (int sweep = 0; sweep < 5; ++sweep) {
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<Move> moves;
      for (std::size_t si = 0; si < beam.size(); ++si) {
        BeamState trial = beam[si];
        for (std::uint32_t c = 0; c < spec.num_classes; ++c) {
          trial.texts[b].label = c;
          moves.push_back({obj.Loss(trial), si, c});
        }
      }
      select(moves, [&](const BeamState& s, std::uint32_t c) {
        BeamState out = s;
        out.texts[b].label = c;
        return out;
      });
    }
    for (std::size_t l = 0; l < spec.seq_len; ++l) {
      const double w = spec.pos_weights[l];
      for (std::size_t b = 0; b < n; ++b) {
        std::vector<Move> moves;
        for (std::size_t si = 0; si < beam.size(); ++si) {
          const BeamState& s = beam[si];
          Head u_rest = obj.Direction(s);
          u_rest.AddOuter(obj.Delta(s.pooled[b], s.texts[b].label),
                          s.pooled[b], -obj.inv_n());
          const double dot_rest = u_rest.Dot(obj.target());
          const double sq_rest = u_rest.Dot(u_rest);
          const auto old_row = original.embedding->row(s.texts[b].tokens[l]);
          for (std::uint32_t v = 0; v < vocab; ++v) {
            const auto r = original.embedding->row(v);
            for (std::size_t j = 0; j < dim; ++j) {
              h[j] = s.pooled[b][j] + w * (r[j] - old_row[j]);
            }
            const auto delta = obj.Delta(h, s.texts[b].label);
            moves.push_back(
                {obj.LossWith(u_rest, dot_rest, sq_rest, h, delta), si, v});
          }
        }
        select(moves, [&](const BeamState& s, std::uint32_t v) {
          BeamState out = s;
          const auto old_row = original.embedding->row(s.texts[b].tokens[l]);
          const auto r = original.embedding->row(v);
          for (std::size_t j = 0; j < dim; ++j) {
            out.pooled[b][j] += w * (r[j] - old_row[j]);
          }
          out.texts[b].tokens[l] = v;
          return out;
        });
      }
    }
    // Transpositions fix tokens that landed at the wrong position, which no
    // single-token move can repair without first raising the loss.
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<Move> moves;
      for (std::size_t si = 0; si < beam.size(); ++si) {
        moves.push_back({beam[si].loss, si, 0});
        BeamState trial = beam[si];
        for (std::size_t i = 0; i < spec.seq_len; ++i) {
          for (std::size_t j = i + 1; j < spec.seq_len; ++j) {
            auto& tokens = trial.texts[b].tokens;
            if (tokens[i] == tokens[j]) continue;
            std::swap(tokens[i], tokens[j]);
            trial.pooled[b] = obj.PoolTokens(trial.texts[b]);
            moves.push_back({obj.Loss(trial), si,
                             static_cast<std::uint32_t>(
                                 1 + i * spec.seq_len + j)});
            std::swap(tokens[i], tokens[j]);
          }
        }
      }
      select(moves, [&](const BeamState& s, std::uint32_t code) {
        BeamState out = s;
        if (code == 0) return out;
        const std::size_t i = (code - 1) / spec.seq_len;
        const std::size_t j = (code - 1) % spec.seq_len;
        std::swap(out.texts[b].tokens[i], out.texts[b].tokens[j]);
        out.pooled[b] = obj.PoolTokens(out.texts[b]);
        return out;
      });
    }
    // Re-pool from scratch so incremental updates cannot drift.
    for (BeamState& s : beam) {
      for (std::size_t b = 0; b < n; ++b) s.pooled[b] = obj.PoolTokens(s.texts[b]);
      s.loss = obj.Loss(s);
    }
    std::stable_sort(beam.begin(), beam.end(),
                     [](const BeamState& a, const BeamState& b) {
                       return a.loss < b.loss;
                     });
    if (!(beam.front().loss < best - 1e-15)) break;
    best = beam.front().loss;
  }
  return beam.front().loss <= init.loss ? beam.front().texts : init.texts;
}

ReconResult Reconstruct(const ModelParams& original,
                        const ModelParams& unlearned, const ReconConfig& config,
                        std::size_t parallelism) {
  config.Validate();
  ReconResult result;
  const Head delta = DeltaTheta(original, unlearned);
  if (!(delta.Norm() > 0.0)) {
    result.no_signal = true;
    result.diagnostics.push_back("no signal: the weight difference is zero");
    return result;
  }
  const Head target = ReconTarget(delta, config.method);
  struct RestartOutput {
    std::vector<DecodedText> texts;
    double loss = 1.0;
    double reg = 0.0;
    std::uint32_t steps = 0;
    std::vector<std::string> notes;
  };
  auto job = [&](std::size_t r) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      seeds.push_back(
          DeriveSeed(config.seed, "dr-candidate", r * config.batch_size + b));
    }
    const OptimizeResult opt = BatchOptimize(original, delta, config, seeds);
    RestartOutput out;
    out.notes = opt.diagnostics;
    out.steps = opt.steps;
    out.reg = opt.reg_loss;
    if (opt.aborted) throw NumericDivergenceError("restart aborted", r);
    for (const Candidate& c : opt.candidates) {
      out.texts.push_back(Decode(c, *original.embedding));
    }
    if (config.beam_width > 0) {
      out.texts = RefineTokens(original, target, config.method, out.texts,
                               config.beam_width);
      out.loss = DiscreteReconLoss(original, out.texts, target, config.method);
    } else {
      out.loss = opt.rec_loss;
    }
    return out;
  };
  const auto outcomes =
      ScheduleJobs<RestartOutput>(config.restarts, job, parallelism);
  bool found = false;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    if (!o.ok()) {
      result.restart_losses.push_back(std::numeric_limits<double>::quiet_NaN());
      result.diagnostics.push_back("restart " + std::to_string(r) + ": " +
                                   o.error);
      continue;
    }
    result.restart_losses.push_back(o.value->loss);
    for (const std::string& note : o.value->notes) {
      result.diagnostics.push_back("restart " + std::to_string(r) + ": " +
                                   note);
    }
    if (!found || o.value->loss < result.rec_loss) {
      found = true;
      result.rec_loss = o.value->loss;
      result.reg_loss = o.value->reg;
      result.decoded = o.value->texts;
      result.best_restart = static_cast<std::uint32_t>(r);
      result.steps = o.value->steps;
    }
  }
  if (!found) result.diagnostics.push_back("every restart failed");
  return result;
}

RougeTriple ScoreReconstruction(std::span<const DecodedText> decoded,
                                std::span<const Example> truth,
                                std::vector<std::size_t>* assignment) {
  const std::size_t n = truth.size();
  if (decoded.size() != n || n == 0) {
    throw UsageError("decoded and ground-truth counts differ");
  }
  if (n > 16) throw UsageError("assignment supports at most 16 texts");
  std::vector<std::vector<RougeTriple>> score(n, std::vector<RougeTriple>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      score[i][j] = {
          Rouge(truth[i].tokens, decoded[j].tokens, RougeVariant::kRouge1),
          Rouge(truth[i].tokens, decoded[j].tokens, RougeVariant::kRouge2),
          Rouge(truth[i].tokens, decoded[j].tokens, RougeVariant::kRougeL)};
    }
  }
  // best[mask]: highest summed R-1 matching truths 0..popcount-1 to the
  // decoded texts in mask.
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> best(full, -1.0);
  std::vector<std::size_t> choice(full, 0);
  best[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (best[mask] < 0.0) continue;
    const std::size_t i = static_cast<std::size_t>(std::popcount(mask));
    if (i == n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = mask | (std::size_t{1} << j);
      const double v = best[mask] + score[i][j].r1;
      if (v > best[next]) {
        best[next] = v;
        choice[next] = j;
      }
    }
  }
  std::vector<std::size_t> match(n);
  std::size_t mask = full - 1;
  for (std::size_t i = n; i-- > 0;) {
    match[i] = choice[mask];
    mask &= ~(std::size_t{1} << match[i]);
  }
  RougeTriple mean;
  for (std::size_t i = 0; i < n; ++i) {
    mean.r1 += score[i][match[i]].r1 / n;
    mean.r2 += score[i][match[i]].r2 / n;
    mean.rl += score[i][match[i]].rl / n;
  }
  if (assignment) *assignment = match;
  return mean;
}

RougeTriple RandomBaselineRouge(std::span<const Example> truth,
                                std::uint32_t vocab_size, std::uint32_t draws,
                                std::uint64_t seed) {
  if (truth.empty() || draws == 0 || vocab_size == 0) {
    throw UsageError("random baseline needs truth, draws and a vocabulary");
  }
  Rng rng(DeriveSeed(seed, "rouge-baseline"));
  RougeTriple mean;
  const double weight = 1.0 / (static_cast<double>(draws) * truth.size());
  for (std::uint32_t d = 0; d < draws; ++d) {
    for (const Example& ex : truth) {
      std::vector<std::uint32_t> hyp(ex.tokens.size());
      for (auto& t : hyp) t = static_cast<std::uint32_t>(rng.Below(vocab_size));
      mean.r1 += weight * Rouge(ex.tokens, hyp, RougeVariant::kRouge1);
      mean.r2 += weight * Rouge(ex.tokens, hyp, RougeVariant::kRouge2);
      mean.rl += weight * Rouge(ex.tokens, hyp, RougeVariant::kRougeL);
    }
  }
  return mean;
}

}  // namespace ulab
