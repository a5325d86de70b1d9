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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <utility>

#include "ulab/mi.h"
#include "ulab/rng.h"
#include "ulab/roc.h"
#include "ulab/rouge.h"
#include "ulab/unlearn.h"

namespace ulab::testing {

std::vector<double> CentralDifference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

double RelativeError(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

double PairwiseAuc(std::span<const double> scores,
                   std::span<const std::uint8_t> mask) {
  std::uint64_t twice = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (mask[i] ? pos : neg) += 1;
    if (!mask[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (mask[j]) continue;
      if (scores[i] > scores[j]) twice += 2;
      if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / (2.0 * pos * neg);
}

std::size_t PrefixScanNts(std::span<const double> statistics,
                          std::span<const std::uint8_t> membership) {
  // Distinct values, highest first, each holding (non-members, members).
  std::map<double, std::pair<std::size_t, std::size_t>, std::greater<>>
      groups;
  for (std::size_t i = 0; i < statistics.size(); ++i) {
    auto& g = groups[statistics[i]];
    (membership[i] ? g.second : g.first) += 1;
  }
  std::vector<std::uint8_t> ranking;
  for (const auto& [value, g] : groups) {
    ranking.insert(ranking.end(), g.first, 0);
    ranking.insert(ranking.end(), g.second, 1);
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k <= ranking.size(); ++k) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < k; ++i) (ranking[i] ? tp : fp) += 1;
    if (fp <= 1) best = std::max(best, tp);
  }
  return best;
}

double RougeF1(std::size_t overlap, std::size_t ref_total,
               std::size_t hyp_total) {
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / hyp_total;
  const double r = static_cast<double>(overlap) / ref_total;
  return 100.0 * 2.0 * p * r / (p + r);
}

namespace {

bool IsSubsequence(const std::vector<std::uint32_t>& s,
                   std::span<const std::uint32_t> of) {
  std::size_t k = 0;
  for (std::uint32_t t : of) {
    if (k < s.size() && s[k] == t) ++k;
  }
  return k == s.size();
}

std::size_t BruteForceLcs(std::span<const std::uint32_t> a,
                          std::span<const std::uint32_t> b) {
  if (a.size() > b.size()) std::swap(a, b);
  std::size_t best = 0;
  for (std::uint32_t bits = 0; bits < (1u << a.size()); ++bits) {
    std::vector<std::uint32_t> sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (bits >> i & 1u) sub.push_back(a[i]);
    }
    if (sub.size() > best && IsSubsequence(sub, b)) best = sub.size();
  }
  return best;
}

}  // namespace

double BruteForceRouge(std::span<const std::uint32_t> reference,
                       std::span<const std::uint32_t> hypothesis,
                       int variant) {
  if (variant == 2) {
    return RougeF1(BruteForceLcs(reference, hypothesis), reference.size(),
                   hypothesis.size());
  }
  const std::size_t n = variant + 1;
  if (reference.size() < n || hypothesis.size() < n) {
    return std::equal(reference.begin(), reference.end(), hypothesis.begin(),
                      hypothesis.end())
               ? 100.0
               : 0.0;
  }
  const std::size_t nr = reference.size() - n + 1;
  const std::size_t nh = hypothesis.size() - n + 1;
  std::vector<bool> used(nr, false);
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < nh; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      if (used[j]) continue;
      if (std::equal(hypothesis.begin() + i, hypothesis.begin() + i + n,
                     reference.begin() + j)) {
        used[j] = true;
        ++overlap;
        break;
      }
    }
  }
  return RougeF1(overlap, nr, nh);
}

ModelParams RandomModel(std::uint32_t vocab, std::uint32_t dim,
                        std::uint32_t seq_len, std::uint32_t classes,
                        std::uint64_t seed, double head_scale) {
  ModelParams m = InitModel(VocabSpec::Make(vocab, dim, seq_len, classes),
                            DeriveSeed(seed, "embedding"));
  Rng rng(DeriveSeed(seed, "head"));
  for (double& v : m.head.values()) v = rng.Normal(0.0, head_scale);
  return m;
}

Example RandomExample(const VocabSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Example ex;
  for (std::uint32_t l = 0; l < spec.seq_len; ++l) {
    ex.tokens.push_back(static_cast<std::uint32_t>(rng.Below(spec.vocab_size)));
  }
  ex.label = static_cast<std::uint32_t>(rng.Below(spec.num_classes));
  return ex;
}

double WorstModelGradientError(int instances, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng(DeriveSeed(seed, "model-gradient", k));
    const auto classes = static_cast<std::uint32_t>(2 + rng.Below(3));
    const auto dim = static_cast<std::uint32_t>(1 + rng.Below(6));
    const auto len = static_cast<std::uint32_t>(1 + rng.Below(5));
    ModelParams model = RandomModel(8, dim, len, classes, rng.NextU64());
    Dataset batch;
    const std::size_t n = 1 + rng.Below(4);
    for (std::size_t i = 0; i < n; ++i) {
      batch.push_back(RandomExample(model.spec, rng.NextU64()));
    }
    const Head analytic = Gradient(model, batch);
    ModelParams probe = model;
    auto loss = [&](std::span<const double> values) {
      std::copy(values.begin(), values.end(), probe.head.values().begin());
      return MeanLoss(probe, batch);
    };
    const std::vector<double> x(model.head.values().begin(),
                                model.head.values().end());
    const std::vector<double> numeric = CentralDifference(loss, x, 1e-5);
    worst = std::max(worst, RelativeError(analytic.values(), numeric));
  }
  return worst;
}

double WorstHypergradientError(int instances, std::uint64_t seed) {
  const UnlearnMethod methods[] = {UnlearnMethod::kGa, UnlearnMethod::kKl,
                                   UnlearnMethod::kNpo,
                                   UnlearnMethod::kTaskVec};
  double worst = 0.0;
  for (UnlearnMethod method : methods) {
    for (int k = 0; k < instances; ++k) {
      Rng rng(DeriveSeed(seed, UnlearnMethodName(method), k));
      const ModelParams model = RandomModel(16, 4, 4, 2, rng.NextU64());
      const std::size_t batch = 1 + rng.Below(3);
      std::vector<Candidate> cands(batch);
      for (Candidate& c : cands) {
        c.seq_len = 4;
        c.dim = 4;
        for (int i = 0; i < 16; ++i) c.x.push_back(rng.Normal(0.0, 0.5));
        for (int i = 0; i < 2; ++i) c.y.push_back(rng.Normal());
      }
      Head target(2, 4);
      for (double& v : target.values()) v = rng.Normal();
      const double beta = rng.Uniform(0.0, 1.0);
      const double norm = rng.Uniform(0.5, 1.5);

      auto pack = [](const std::vector<Candidate>& cs) {
        std::vector<double> out;
        for (const Candidate& c : cs) {
          out.insert(out.end(), c.x.begin(), c.x.end());
          out.insert(out.end(), c.y.begin(), c.y.end());
        }
        return out;
      };
      std::vector<Candidate> probe = cands;
      auto total = [&](std::span<const double> values) {
        std::size_t at = 0;
        for (Candidate& c : probe) {
          for (double& v : c.x) v = values[at++];
          for (double& v : c.y) v = values[at++];
        }
        return TotalLoss(model, probe, target, method, beta, norm).total;
      };
      const LossAndGradient lg =
          TotalLoss(model, cands, target, method, beta, norm);
      const std::vector<double> numeric =
          CentralDifference(total, pack(cands), 1e-6);
      worst = std::max(worst, RelativeError(pack(lg.grad), numeric));
    }
  }
  return worst;
}

namespace {

// n scores on a coarse grid with a mask holding both classes.
void RandomRanking(Rng& rng, std::size_t n, std::vector<double>& scores,
                   std::vector<std::uint8_t>& mask) {
  scores.resize(n);
  mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = static_cast<double>(rng.Below(n)) / 4.0;
    mask[i] = static_cast<std::uint8_t>(rng.Below(2));
  }
  mask[0] = 1;
  mask[1] = 0;
  std::span<std::uint8_t> view(mask);
  rng.Shuffle(view);
}

std::vector<std::uint32_t> RandomTokens(Rng& rng, std::size_t max_len,
                                        std::uint32_t alphabet) {
  std::vector<std::uint32_t> out(1 + rng.Below(max_len));
  for (std::uint32_t& t : out) t = static_cast<std::uint32_t>(rng.Below(alphabet));
  return out;
}

}  // namespace

int RocOracleMismatches(int trials, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "roc-oracle"));
  std::vector<double> scores;
  std::vector<std::uint8_t> mask;
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    RandomRanking(rng, 2 + rng.Below(49), scores, mask);
    bad += ComputeRoc(scores, mask).auc != PairwiseAuc(scores, mask);
  }
  return bad;
}

int NtsOracleMismatches(int trials, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "nts-oracle"));
  std::vector<double> scores;
  std::vector<std::uint8_t> mask;
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    RandomRanking(rng, 2 + rng.Below(19), scores, mask);
    bad += NtsAt1Nfs(scores, mask) != PrefixScanNts(scores, mask);
  }
  return bad;
}

int RougeOracleMismatches(int trials, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "rouge-oracle"));
  const RougeVariant variants[] = {RougeVariant::kRouge1,
                                   RougeVariant::kRouge2,
                                   RougeVariant::kRougeL};
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint32_t alphabet = 2 + static_cast<std::uint32_t>(rng.Below(6));
    const auto ref = RandomTokens(rng, 10, alphabet);
    const auto hyp = RandomTokens(rng, 10, alphabet);
    for (int v = 0; v < 3; ++v) {
      bad += Rouge(ref, hyp, variants[v]) != BruteForceRouge(ref, hyp, v);
    }
  }
  return bad;
}

}  // namespace ulab::testing
