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


#include "ulab/experiment_config.h"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <set>
#include <string>
#include <type_traits>

#include "ulab/errors.h"
#include "ulab/io.h"
#include "ulab/rng.h"

namespace ulab {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw UsageError(where_ + ": expected an object");
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_unsigned();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    }
    if (!ok) throw UsageError(Path(key) + ": wrong type");
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (v.get<std::uint64_t>() > std::numeric_limits<T>::max()) {
        throw UsageError(Path(key) + ": out of range");
      }
    }
    out = v.get<T>();
  }

  // Enum stored by name.
  template <typename T, typename Parse>
  void GetName(const char* key, T& out, Parse parse) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) throw UsageError(Path(key) + ": wrong type");
    out = Wrap(key, [&] { return parse(j_.at(key).get<std::string>()); });
  }

  template <typename T, typename Parse>
  void GetNames(const char* key, std::vector<T>& out, Parse parse) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw UsageError(Path(key) + ": expected an array");
    out.clear();
    for (const json& e : v) {
      if (!e.is_string()) throw UsageError(Path(key) + ": wrong type");
      out.push_back(Wrap(key, [&] { return parse(e.get<std::string>()); }));
    }
  }

  void GetDoubles(const char* key, std::vector<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw UsageError(Path(key) + ": expected an array");
    out.clear();
    for (const json& e : v) {
      if (!e.is_number()) throw UsageError(Path(key) + ": wrong type");
      out.push_back(e.get<double>());
    }
  }

  template <typename T, typename FromJson>
  void GetObject(const char* key, T& out, FromJson from) {
    seen_.insert(key);
    if (j_.contains(key)) out = from(j_.at(key));
  }

  // Object parsed with defaults from `out` rather than type defaults.
  template <typename T, typename Fill>
  void Nested(const char* key, T& out, Fill fill) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), Path(key));
    fill(r, out);
    r.Finish();
  }

  const json& raw() const { return j_; }
  std::string Path(const char* key) const { return where_ + "." + key; }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw UsageError(where_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  template <typename F>
  auto Wrap(const char* key, F f) {
    try {
      return f();
    } catch (const UsageError& e) {
      throw UsageError(Path(key) + ": " + e.what());
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string, std::less<>> seen_;
};

json Names(const auto& values, auto name) {
  json out = json::array();
  for (const auto& v : values) out.push_back(std::string(name(v)));
  return out;
}

void FillVocab(Reader& r, VocabSpec& v) {
  std::uint32_t size = v.vocab_size, dim = v.embed_dim, len = v.seq_len,
                classes = v.num_classes;
  r.Get("size", size);
  r.Get("embed_dim", dim);
  r.Get("seq_len", len);
  r.Get("num_classes", classes);
  v = VocabSpec::Make(size, dim, len, classes);
}

void FillData(Reader& r, DataGenConfig& c) {
  r.Nested("vocab", c.vocab, FillVocab);
  r.Get("class_signal", c.class_signal);
  r.Get("class_pool_size", c.class_pool_size);
  r.Get("train_size", c.train_size);
  r.Get("audit_size", c.audit_size);
  r.Get("aux_size", c.aux_size);
  r.Get("holdout_size", c.holdout_size);
  r.Get("seed", c.seed);
}

void FillTrain(Reader& r, TrainConfig& c) {
  r.Get("learning_rate", c.learning_rate);
  r.Get("epochs", c.epochs);
  r.GetName("optimizer", c.optimizer, ParseOptimizer);
  r.Get("batch_size", c.batch_size);
  r.Get("seed", c.seed);
}

void FillUnlearn(Reader& r, UnlearnConfig& c) {
  r.GetName("method", c.method, ParseUnlearnMethod);
  r.Get("steps", c.steps);
  r.Get("learning_rate", c.learning_rate);
  r.Get("npo_beta", c.npo_beta);
  r.Get("taskvec_lambda", c.taskvec_lambda);
  r.Get("retain_weight", c.retain_weight);
  r.Get("seed", c.seed);
}

void FillAudit(Reader& r, AuditConfig& c) {
  r.Get("num_audited", c.num_audited);
  r.Get("shadows", c.shadows);
  r.GetDoubles("fpr_grid", c.fpr_grid);
  r.GetName("mode", c.mode, ParseAuditMode);
  r.GetName("score_kind", c.score_kind, ParseScoreKind);
  r.Get("seed", c.seed);
}

void FillAttack(Reader& r, AttackModelConfig& c) {
  r.Get("hidden_layer", c.hidden_layer);
  r.Get("hidden_units", c.hidden_units);
  r.Get("learning_rate", c.learning_rate);
  r.Get("max_epochs", c.max_epochs);
  r.Get("patience", c.patience);
  r.Get("validation_fraction", c.validation_fraction);
  r.Get("seed", c.seed);
}

void FillRelaxed(Reader& r, RelaxedMiConfig& c) {
  r.Get("shadows", c.shadows);
  r.Get("shadow_train_size", c.shadow_train_size);
  r.Nested("attack", c.attack, FillAttack);
  r.Get("seed", c.seed);
}

void FillRecon(Reader& r, ReconConfig& c) {
  r.GetName("method", c.method, ParseUnlearnMethod);
  r.Get("alpha", c.alpha);
  r.Get("beta", c.beta);
  r.Get("max_steps", c.max_steps);
  r.Get("tolerance", c.tolerance);
  r.Get("batch_size", c.batch_size);
  r.Get("restarts", c.restarts);
  r.Get("beam_width", c.beam_width);
  r.Get("seed", c.seed);
}

template <typename T, typename Fill>
T Parse(const json& j, const char* where, Fill fill) {
  T out;
  Reader r(j, where);
  fill(r, out);
  r.Finish();
  return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (UnlearnMethod m : kAllUnlearnMethods) {
    UnlearnConfig c;
    c.method = m;
    unlearn.push_back(c);
  }
}

void ExperimentConfig::Validate() const {
  data.Validate();
  train.Validate();
  if (unlearn.empty()) throw UsageError("unlearn: need at least one method");
  for (std::size_t i = 0; i < unlearn.size(); ++i) {
    unlearn[i].Validate();
    for (std::size_t k = 0; k < i; ++k) {
      if (unlearn[k].method == unlearn[i].method) {
        throw UsageError("unlearn: method '" +
                         std::string(UnlearnMethodName(unlearn[i].method)) +
                         "' listed twice");
      }
    }
  }
  audit.audit.Validate();
  if (audit.modes.empty()) throw UsageError("audit.modes: empty");
  if (strict_mi.num_candidates < 2 || strict_mi.num_candidates % 2 != 0) {
    throw UsageError("strict_mi.num_candidates must be even and at least 2");
  }
  if (strict_mi.score_kinds.empty()) {
    throw UsageError("strict_mi.score_kinds: empty");
  }
  relaxed_mi.mi.Validate();
  if (relaxed_mi.num_targets < 2 || relaxed_mi.num_targets % 2 != 0) {
    throw UsageError("relaxed_mi.num_targets must be even and at least 2");
  }
  if (!(relaxed_mi.fpr > 0.0 && relaxed_mi.fpr < 1.0)) {
    throw UsageError("relaxed_mi.fpr must lie in (0, 1)");
  }
  if (relaxed_mi.methods.empty()) throw UsageError("relaxed_mi.methods: empty");
  dr.recon.Validate();
  if (dr.num_targets == 0) throw UsageError("dr.num_targets must be positive");
  if (dr.num_targets % dr.recon.batch_size != 0) {
    throw UsageError("dr.num_targets must be a multiple of recon.batch_size");
  }
  if (dr.num_targets > data.train_size) {
    throw UsageError("dr.num_targets exceeds the training set");
  }
  if (dr.baseline_draws == 0) throw UsageError("dr.baseline_draws: zero");
  if (dr.methods.empty()) throw UsageError("dr.methods: empty");
  for (UnlearnMethod m : dr.methods) {
    if (m == UnlearnMethod::kRetrain) {
      throw UsageError("dr.methods: retraining cannot be reconstructed from");
    }
  }
  if (repetitions == 0) throw UsageError("repetitions must be positive");
  if (threads == 0) throw UsageError("threads must be positive");
  if (out_dir.empty()) throw UsageError("out_dir: empty");
}

UnlearnConfig ExperimentConfig::UnlearnFor(UnlearnMethod method) const {
  for (const UnlearnConfig& c : unlearn) {
    if (c.method == method) return c;
  }
  UnlearnConfig c;
  c.method = method;
  return c;
}

SeedPlan DeriveSeedPlan(std::uint64_t master_seed, std::uint32_t repetition) {
  SeedPlan p;
  p.data = DeriveSeed(master_seed, "data", repetition);
  p.embedding = DeriveSeed(master_seed, "embedding", repetition);
  p.train = DeriveSeed(master_seed, "train", repetition);
  p.unlearn = DeriveSeed(master_seed, "unlearn", repetition);
  p.audit = DeriveSeed(master_seed, "audit", repetition);
  p.strict_mi = DeriveSeed(master_seed, "strict-mi", repetition);
  p.relaxed_mi = DeriveSeed(master_seed, "relaxed-mi", repetition);
  p.dr = DeriveSeed(master_seed, "dr", repetition);
  return p;
}

json SeedPlanToJson(const SeedPlan& p) {
  return json{{"data", p.data},           {"embedding", p.embedding},
              {"train", p.train},         {"unlearn", p.unlearn},
              {"audit", p.audit},         {"strict_mi", p.strict_mi},
              {"relaxed_mi", p.relaxed_mi}, {"dr", p.dr}};
}

json VocabSpecToJson(const VocabSpec& v) {
  return json{{"size", v.vocab_size},
              {"embed_dim", v.embed_dim},
              {"seq_len", v.seq_len},
              {"num_classes", v.num_classes}};
}

VocabSpec VocabSpecFromJson(const json& j) {
  return Parse<VocabSpec>(j, "vocab", FillVocab);
}

json DataGenConfigToJson(const DataGenConfig& c) {
  return json{{"vocab", VocabSpecToJson(c.vocab)},
              {"class_signal", c.class_signal},
              {"class_pool_size", c.class_pool_size},
              {"train_size", c.train_size},
              {"audit_size", c.audit_size},
              {"aux_size", c.aux_size},
              {"holdout_size", c.holdout_size},
              {"seed", c.seed}};
}

DataGenConfig DataGenConfigFromJson(const json& j) {
  return Parse<DataGenConfig>(j, "data", FillData);
}

json TrainConfigToJson(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"optimizer", std::string(OptimizerName(c.optimizer))},
              {"batch_size", c.batch_size},
              {"seed", c.seed}};
}

TrainConfig TrainConfigFromJson(const json& j) {
  return Parse<TrainConfig>(j, "train", FillTrain);
}

json UnlearnConfigToJson(const UnlearnConfig& c) {
  return json{{"method", std::string(UnlearnMethodName(c.method))},
              {"steps", c.steps},
              {"learning_rate", c.learning_rate},
              {"npo_beta", c.npo_beta},
              {"taskvec_lambda", c.taskvec_lambda},
              {"retain_weight", c.retain_weight},
              {"seed", c.seed}};
}

UnlearnConfig UnlearnConfigFromJson(const json& j) {
  return Parse<UnlearnConfig>(j, "unlearn", FillUnlearn);
}

json AuditConfigToJson(const AuditConfig& c) {
  return json{{"num_audited", c.num_audited},
              {"shadows", c.shadows},
              {"fpr_grid", c.fpr_grid},
              {"mode", std::string(AuditModeName(c.mode))},
              {"score_kind", std::string(ScoreKindName(c.score_kind))},
              {"seed", c.seed}};
}

AuditConfig AuditConfigFromJson(const json& j) {
  return Parse<AuditConfig>(j, "audit", FillAudit);
}

json AttackModelConfigToJson(const AttackModelConfig& c) {
  return json{{"hidden_layer", c.hidden_layer},
              {"hidden_units", c.hidden_units},
              {"learning_rate", c.learning_rate},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"validation_fraction", c.validation_fraction},
              {"seed", c.seed}};
}

AttackModelConfig AttackModelConfigFromJson(const json& j) {
  return Parse<AttackModelConfig>(j, "attack", FillAttack);
}

json RelaxedMiConfigToJson(const RelaxedMiConfig& c) {
  return json{{"shadows", c.shadows},
              {"shadow_train_size", c.shadow_train_size},
              {"attack", AttackModelConfigToJson(c.attack)},
              {"seed", c.seed}};
}

RelaxedMiConfig RelaxedMiConfigFromJson(const json& j) {
  return Parse<RelaxedMiConfig>(j, "relaxed_mi", FillRelaxed);
}

json ReconConfigToJson(const ReconConfig& c) {
  return json{{"method", std::string(UnlearnMethodName(c.method))},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"max_steps", c.max_steps},
              {"tolerance", c.tolerance},
              {"batch_size", c.batch_size},
              {"restarts", c.restarts},
              {"beam_width", c.beam_width},
              {"seed", c.seed}};
}

ReconConfig ReconConfigFromJson(const json& j) {
  return Parse<ReconConfig>(j, "recon", FillRecon);
}

json ExperimentConfigToJson(const ExperimentConfig& c) {
  json unlearn = json::array();
  for (const UnlearnConfig& u : c.unlearn) {
    unlearn.push_back(UnlearnConfigToJson(u));
  }
  return json{
      {"data", DataGenConfigToJson(c.data)},
      {"train", TrainConfigToJson(c.train)},
      {"unlearn", unlearn},
      {"audit",
       {{"modes", Names(c.audit.modes, AuditModeName)},
        {"config", AuditConfigToJson(c.audit.audit)}}},
      {"strict_mi",
       {{"num_candidates", c.strict_mi.num_candidates},
        {"score_kinds", Names(c.strict_mi.score_kinds, ScoreKindName)},
        {"mislabel", c.strict_mi.mislabel}}},
      {"relaxed_mi",
       {{"num_targets", c.relaxed_mi.num_targets},
        {"methods", Names(c.relaxed_mi.methods, UnlearnMethodName)},
        {"mislabel", c.relaxed_mi.mislabel},
        {"fpr", c.relaxed_mi.fpr},
        {"config", RelaxedMiConfigToJson(c.relaxed_mi.mi)}}},
      {"dr",
       {{"num_targets", c.dr.num_targets},
        {"methods", Names(c.dr.methods, UnlearnMethodName)},
        {"baseline_draws", c.dr.baseline_draws},
        {"recon", ReconConfigToJson(c.dr.recon)}}},
      {"repetitions", c.repetitions},
      {"threads", c.threads},
      {"out_dir", c.out_dir},
      {"master_seed", c.master_seed}};
}

ExperimentConfig ExperimentConfigFromJson(const json& j) {
  ExperimentConfig c;
  Reader r(j, "config");
  r.Nested("data", c.data, FillData);
  r.Nested("train", c.train, FillTrain);
  r.GetObject("unlearn", c.unlearn, [](const json& v) {
    if (!v.is_array()) throw UsageError("config.unlearn: expected an array");
    std::vector<UnlearnConfig> out;
    for (const json& e : v) out.push_back(UnlearnConfigFromJson(e));
    return out;
  });
  r.Nested("audit", c.audit, [](Reader& a, AuditCampaignConfig& out) {
    a.GetNames("modes", out.modes, ParseAuditMode);
    a.Nested("config", out.audit, FillAudit);
  });
  r.Nested("strict_mi", c.strict_mi,
           [](Reader& s, StrictMiCampaignConfig& out) {
             s.Get("num_candidates", out.num_candidates);
             s.GetNames("score_kinds", out.score_kinds, ParseScoreKind);
             s.Get("mislabel", out.mislabel);
           });
  r.Nested("relaxed_mi", c.relaxed_mi,
           [](Reader& s, RelaxedMiCampaignConfig& out) {
             s.Get("num_targets", out.num_targets);
             s.GetNames("methods", out.methods, ParseUnlearnMethod);
             s.Get("mislabel", out.mislabel);
             s.Get("fpr", out.fpr);
             s.Nested("config", out.mi, FillRelaxed);
           });
  r.Nested("dr", c.dr, [](Reader& s, DrCampaignConfig& out) {
    s.Get("num_targets", out.num_targets);
    s.GetNames("methods", out.methods, ParseUnlearnMethod);
    s.Get("baseline_draws", out.baseline_draws);
    s.Nested("recon", out.recon, FillRecon);
  });
  r.Get("repetitions", c.repetitions);
  r.Get("threads", c.threads);
  r.Get("out_dir", c.out_dir);
  r.Get("master_seed", c.master_seed);
  r.Finish();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw UsageError("config file not found: " + path);
  }
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  ExperimentConfig c;
  try {
    c = ExperimentConfigFromJson(j);
    c.Validate();
  } catch (const UsageError& e) {
    throw UsageError(path + ": " + e.what());
  }
  return c;
}

}  // namespace ulab
