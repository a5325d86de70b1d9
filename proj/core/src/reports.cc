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


#include "ulab/reports.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>

#include "ulab/errors.h"
#include "ulab/io.h"

#ifndef ULAB_VERSION
#define ULAB_VERSION "unknown"
#endif

namespace ulab {

using nlohmann::json;

namespace {

json Examples(std::span<const Example> examples) {
  json out = json::array();
  for (const Example& ex : examples) {
    out.push_back({{"tokens", ex.tokens}, {"label", ex.label}});
  }
  return out;
}

json Texts(std::span<const DecodedText> texts) {
  json out = json::array();
  for (const DecodedText& t : texts) {
    out.push_back({{"tokens", t.tokens}, {"label", t.label}});
  }
  return out;
}

// Table heading for a method name stored in JSON.
std::string MethodLabel(const std::string& name) {
  return std::string(UnlearnMethodLabel(ParseUnlearnMethod(name)));
}

std::vector<std::string> MethodLabels(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const std::string& n : names) out.push_back(MethodLabel(n));
  return out;
}

json MethodNames(const std::vector<UnlearnMethod>& methods) {
  json out = json::array();
  for (UnlearnMethod m : methods) out.push_back(UnlearnMethodName(m));
  return out;
}

// Running means keyed by a JSON key, in first-seen order.
class Averager {
 public:
  void Add(const json& key, const std::vector<double>& values) {
    for (Slot& s : slots_) {
      if (s.key == key) {
        for (std::size_t i = 0; i < values.size(); ++i) s.sum[i] += values[i];
        ++s.count;
        return;
      }
    }
    slots_.push_back({key, values, 1});
  }

  template <typename F>
  void ForEach(F f) const {
    for (const Slot& s : slots_) {
      std::vector<double> mean(s.sum.size());
      for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] = s.sum[i] / static_cast<double>(s.count);
      }
      f(s.key, mean, s.count);
    }
  }

 private:
  struct Slot {
    json key;
    std::vector<double> sum;
    std::size_t count = 0;
  };
  std::vector<Slot> slots_;
};

std::string FprLabel(double fpr) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "tpr@%g%%fpr", fpr * 100.0);
  return buf;
}

std::string JoinRow(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  return out + "\n";
}

std::vector<std::string> Strings(const json& array) {
  std::vector<std::string> out;
  for (const json& v : array) out.push_back(v.get<std::string>());
  return out;
}

// The summary row matching every (key, value) in `where`, or null.
const json* Find(const json& summary, const json& where) {
  for (const json& row : summary) {
    bool match = true;
    for (const auto& [k, v] : where.items()) {
      if (row.at(k) != v) {
        match = false;
        break;
      }
    }
    if (match) return &row;
  }
  return nullptr;
}

json CampaignOrNull(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return nullptr;
  return json::parse(ReadFile(path));
}

}  // namespace

std::string FormatCell(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  // Avoid "-0.00" so rounding never invents a sign.
  if (std::string(buf) == "-0.00") return "0.00";
  return buf;
}

json AuditJson(const AuditCampaignResult& result) {
  json runs = json::array();
  json grid = json::array();
  Averager avg;
  for (const AuditRun& run : result.runs) {
    const AuditReport& r = run.report;
    grid = r.config.fpr_grid;
    runs.push_back({{"repetition", run.repetition},
                    {"mode", AuditModeName(run.mode)},
                    {"method", r.method},
                    {"tpr_at_fpr", r.tpr_at_fpr},
                    {"auc", r.roc.auc},
                    {"binarized_accuracy", r.binarized_accuracy},
                    {"original_tpr_at_fpr", r.original_tpr_at_fpr},
                    {"original_auc", r.original_roc.auc},
                    {"mask", r.mask},
                    {"p_member", r.p_member},
                    {"log_ratio", r.log_ratio},
                    {"target_score", r.target_score},
                    {"original_log_ratio", r.original_log_ratio},
                    {"failed_shadows", r.failed_shadows},
                    {"diagnostics", r.diagnostics}});
    std::vector<double> values = r.tpr_at_fpr;
    values.push_back(r.roc.auc);
    values.push_back(r.binarized_accuracy);
    avg.Add({{"mode", AuditModeName(run.mode)}, {"method", r.method}}, values);
  }
  json summary = json::array();
  avg.ForEach([&](const json& key, const std::vector<double>& mean,
                  std::size_t count) {
    json row = key;
    row["tpr_at_fpr"] = std::vector<double>(mean.begin(), mean.end() - 2);
    row["auc"] = mean[mean.size() - 2];
    row["binarized_accuracy"] = mean.back();
    row["repetitions"] = count;
    summary.push_back(std::move(row));
  });
  json modes = json::array();
  for (const AuditRun& run : result.runs) {
    const json m = AuditModeName(run.mode);
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) {
      modes.push_back(m);
    }
  }
  return {{"methods", MethodNames(result.methods)},
          {"modes", modes},
          {"fpr_grid", grid},
          {"runs", runs},
          {"summary", summary},
          {"failures", result.failures}};
}

std::string AuditCsv(const json& audit) {
  const std::vector<std::string> methods = Strings(audit.at("methods"));
  std::vector<std::string> header = {"mode", "metric"};
  const std::vector<std::string> labels = MethodLabels(methods);
  header.insert(header.end(), labels.begin(), labels.end());
  std::string out = JoinRow(header);
  const json& summary = audit.at("summary");
  const json& grid = audit.at("fpr_grid");
  for (const json& mode : audit.at("modes")) {
    auto emit = [&](const std::string& metric, auto value) {
      std::vector<std::string> row = {mode.get<std::string>(), metric};
      for (const std::string& m : methods) {
        const json* s = Find(summary, {{"mode", mode}, {"method", m}});
        row.push_back(s ? FormatCell(value(*s)) : "");
      }
      out += JoinRow(row);
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
      emit(FprLabel(grid[i].get<double>()), [&](const json& s) {
        return s.at("tpr_at_fpr").at(i).get<double>();
      });
    }
    emit("auc", [](const json& s) { return s.at("auc").get<double>(); });
  }
  return out;
}

json StrictMiJson(const StrictMiCampaignResult& result) {
  json runs = json::array();
  Averager avg;
  for (const StrictMiRun& run : result.runs) {
    const StrictMiReport& r = run.report;
    const std::string kind(ScoreKindName(r.score_kind));
    const std::string method(UnlearnMethodName(run.method));
    runs.push_back({{"repetition", run.repetition},
                    {"method", method},
                    {"score_kind", kind},
                    {"nts_at_1nfs", r.nts_at_1nfs},
                    {"auc", r.roc.auc},
                    {"statistics", r.statistics},
                    {"membership", r.membership}});
    avg.Add({{"score_kind", kind}, {"method", method}},
            {static_cast<double>(r.nts_at_1nfs), r.roc.auc});
  }
  json summary = json::array();
  avg.ForEach([&](const json& key, const std::vector<double>& mean,
                  std::size_t count) {
    json row = key;
    row["nts_at_1nfs"] = mean[0];
    row["auc"] = mean[1];
    row["repetitions"] = count;
    summary.push_back(std::move(row));
  });
  json kinds = json::array();
  for (ScoreKind k : result.score_kinds) kinds.push_back(ScoreKindName(k));
  return {{"methods", MethodNames(result.methods)},
          {"score_kinds", kinds},
          {"runs", runs},
          {"summary", summary},
          {"failures", result.failures}};
}

std::string StrictMiCsv(const json& strict) {
  const std::vector<std::string> methods = Strings(strict.at("methods"));
  std::vector<std::string> header = {"score"};
  const std::vector<std::string> labels = MethodLabels(methods);
  header.insert(header.end(), labels.begin(), labels.end());
  std::string out = JoinRow(header);
  const json& summary = strict.at("summary");
  if (summary.empty()) return out;
  for (const json& kind : strict.at("score_kinds")) {
    std::vector<std::string> row = {kind.get<std::string>()};
    for (const std::string& m : methods) {
      const json* s = Find(summary, {{"score_kind", kind}, {"method", m}});
      row.push_back(s ? FormatCell(s->at("nts_at_1nfs").get<double>()) : "");
    }
    out += JoinRow(row);
  }
  return out;
}

json RelaxedMiJson(const RelaxedMiCampaignResult& result) {
  json targets = json::array();
  for (const RelaxedMiTarget& t : result.targets) {
    targets.push_back({{"repetition", t.repetition},
                       {"method", UnlearnMethodName(t.method)},
                       {"index", t.index},
                       {"member", t.member},
                       {"p_member", t.p_member},
                       {"lira_p_member", t.lira_p_member},
                       {"lira_log_ratio", t.lira_log_ratio},
                       {"attack_failed", t.attack_failed}});
  }
  json runs = json::array();
  Averager avg;
  for (const RelaxedMiRun& r : result.runs) {
    const std::string method(UnlearnMethodName(r.method));
    runs.push_back({{"repetition", r.repetition},
                    {"method", method},
                    {"tula_tpr", r.tula_tpr},
                    {"tula_auc", r.tula_auc},
                    {"lira_tpr", r.lira_tpr},
                    {"lira_auc", r.lira_auc}});
    avg.Add({{"method", method}},
            {r.tula_tpr, r.lira_tpr, r.tula_auc, r.lira_auc});
  }
  json summary = json::array();
  avg.ForEach([&](const json& key, const std::vector<double>& mean,
                  std::size_t count) {
    json row = key;
    row["tula_tpr"] = mean[0];
    row["lira_tpr"] = mean[1];
    row["tula_auc"] = mean[2];
    row["lira_auc"] = mean[3];
    row["repetitions"] = count;
    summary.push_back(std::move(row));
  });
  return {{"methods", MethodNames(result.methods)},
          {"fpr", result.fpr},
          {"targets", targets},
          {"runs", runs},
          {"summary", summary},
          {"failures", result.failures}};
}

std::string RelaxedMiCsv(const json& relaxed) {
  const std::string tpr = FprLabel(relaxed.at("fpr").get<double>());
  std::string out = JoinRow({"method", "tula_" + tpr, "lira_" + tpr,
                             "tula_auc", "lira_auc"});
  for (const json& s : relaxed.at("summary")) {
    out += JoinRow({MethodLabel(s.at("method").get<std::string>()),
                    FormatCell(s.at("tula_tpr").get<double>()),
                    FormatCell(s.at("lira_tpr").get<double>()),
                    FormatCell(s.at("tula_auc").get<double>()),
                    FormatCell(s.at("lira_auc").get<double>())});
  }
  return out;
}

json DrJson(const DrCampaignResult& result) {
  json targets = json::array();
  Averager avg;
  for (const DrTarget& t : result.targets) {
    const std::string method(UnlearnMethodName(t.method));
    targets.push_back({{"repetition", t.repetition},
                       {"method", method},
                       {"group", t.group},
                       {"truth", Examples(t.truth)},
                       {"decoded", Texts(t.decoded)},
                       {"r1", t.rouge.r1},
                       {"r2", t.rouge.r2},
                       {"rl", t.rouge.rl},
                       {"baseline_r1", t.baseline.r1},
                       {"baseline_r2", t.baseline.r2},
                       {"baseline_rl", t.baseline.rl},
                       {"label_accuracy", t.label_accuracy},
                       {"rec_loss", t.rec_loss},
                       {"best_restart", t.best_restart},
                       {"no_signal", t.no_signal}});
    avg.Add({{"method", method}},
            {t.rouge.r1, t.rouge.r2, t.rouge.rl, t.baseline.r1, t.baseline.r2,
             t.baseline.rl, t.label_accuracy});
  }
  json summary = json::array();
  avg.ForEach([&](const json& key, const std::vector<double>& mean,
                  std::size_t count) {
    json row = key;
    row["dataset"] = "synth";
    row["r1"] = mean[0];
    row["r2"] = mean[1];
    row["rl"] = mean[2];
    row["baseline_r1"] = mean[3];
    row["baseline_r2"] = mean[4];
    row["baseline_rl"] = mean[5];
    row["label_accuracy"] = mean[6];
    row["targets"] = count;
    summary.push_back(std::move(row));
  });
  return {{"methods", MethodNames(result.methods)},
          {"targets", targets},
          {"summary", summary},
          {"failures", result.failures}};
}

std::string DrCsv(const json& dr) {
  static const char* kColumns[] = {"r1",          "r2",          "rl",
                                   "baseline_r1", "baseline_r2", "baseline_rl",
                                   "label_accuracy"};
  std::vector<std::string> header = {"method", "dataset"};
  header.insert(header.end(), std::begin(kColumns), std::end(kColumns));
  std::string out = JoinRow(header);
  for (const json& s : dr.at("summary")) {
    std::vector<std::string> row = {
        MethodLabel(s.at("method").get<std::string>()),
        s.at("dataset").get<std::string>()};
    for (const char* c : kColumns) {
      row.push_back(FormatCell(s.at(c).get<double>()));
    }
    out += JoinRow(row);
  }
  return out;
}

ReportBundle EmitReports(const ExperimentResults& results) {
  const ExperimentConfig& config = results.config;
  ReportBundle bundle;
  json campaigns = json::array();
  json failures = json::object();
  auto add = [&](std::string_view name, const json& doc, auto csv) {
    const std::string stem(name);
    bundle.files[stem + ".csv"] = csv(doc);
    if (doc.contains("runs") || doc.contains("targets")) {
      bundle.files[stem + ".json"] = doc.dump(2) + "\n";
      campaigns.push_back(stem);
      failures[stem] = doc.at("failures");
    }
  };
  std::vector<UnlearnMethod> configured;
  for (const UnlearnConfig& u : config.unlearn) configured.push_back(u.method);

  if (results.audit) {
    add(kAuditReport, AuditJson(*results.audit), AuditCsv);
  } else {
    add(kAuditReport,
        json{{"methods", MethodNames(configured)},
             {"modes", json::array()},
             {"fpr_grid", json::array()},
             {"summary", json::array()}},
        AuditCsv);
  }
  if (results.strict_mi) {
    add(kStrictMiReport, StrictMiJson(*results.strict_mi), StrictMiCsv);
  } else {
    add(kStrictMiReport,
        json{{"methods", MethodNames(configured)},
             {"score_kinds", json::array()},
             {"summary", json::array()}},
        StrictMiCsv);
  }
  if (results.relaxed_mi) {
    add(kRelaxedMiReport, RelaxedMiJson(*results.relaxed_mi), RelaxedMiCsv);
  } else {
    add(kRelaxedMiReport,
        json{{"fpr", config.relaxed_mi.fpr}, {"summary", json::array()}},
        RelaxedMiCsv);
  }
  if (results.dr) {
    add(kDrReport, DrJson(*results.dr), DrCsv);
  } else {
    add(kDrReport, json{{"summary", json::array()}}, DrCsv);
  }

  json seeds = json::array();
  for (std::uint32_t r = 0; r < config.repetitions; ++r) {
    json s = SeedPlanToJson(DeriveSeedPlan(config.master_seed, r));
    s["repetition"] = r;
    seeds.push_back(std::move(s));
  }
  // Thread count and output path do not affect any number, so they are kept
  // out of the bundle (see WriteTiming) to keep it byte-identical.
  json config_json = ExperimentConfigToJson(config);
  config_json.erase("threads");
  config_json.erase("out_dir");
  json files = json::array();
  for (const auto& [name, contents] : bundle.files) files.push_back(name);
  json manifest = {
      {"tool", "ulab"},
      {"version", ULAB_VERSION},
      {"campaigns", campaigns},
      {"config", config_json},
      {"seeds", seeds},
      {"files", files},
      {"failures", failures},
      {"timing_file", kTimingFile},
      {"build",
       {{"compiler", __VERSION__},
        {"cplusplus", __cplusplus},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  bundle.files[std::string(kManifestFile)] = manifest.dump(2) + "\n";
  return bundle;
}

void WriteBundle(const ReportBundle& bundle,
                 const std::filesystem::path& out_dir) {
  const std::string manifest(kManifestFile);
  for (const auto& [name, contents] : bundle.files) {
    if (name != manifest) WriteFileAtomic(out_dir / name, contents);
  }
  const auto it = bundle.files.find(manifest);
  if (it != bundle.files.end()) WriteFileAtomic(out_dir / manifest, it->second);
}

ReportBundle RebuildCsvs(const std::filesystem::path& out_dir) {
  if (!std::filesystem::exists(out_dir / kManifestFile)) {
    throw UsageError("no manifest.json in " + out_dir.string());
  }
  ReportBundle bundle;
  auto rebuild = [&](std::string_view name, auto csv) {
    const std::string stem(name);
    const json doc = CampaignOrNull(out_dir / (stem + ".json"));
    if (!doc.is_null()) bundle.files[stem + ".csv"] = csv(doc);
  };
  try {
    rebuild(kAuditReport, AuditCsv);
    rebuild(kStrictMiReport, StrictMiCsv);
    rebuild(kRelaxedMiReport, RelaxedMiCsv);
    rebuild(kDrReport, DrCsv);
  } catch (const json::exception& e) {
    throw UsageError(out_dir.string() + ": malformed report JSON: " + e.what());
  }
  return bundle;
}

void WriteTiming(const std::filesystem::path& out_dir,
                 const std::map<std::string, double>& seconds,
                 std::size_t threads) {
  json j = json::object();
  json wall = json::object();
  for (const auto& [phase, s] : seconds) wall[phase] = s;
  j["wall_clock_seconds"] = wall;
  j["threads"] = threads;
  j["out_dir"] = out_dir.string();
  WriteFileAtomic(out_dir / kTimingFile, j.dump(2) + "\n");
}

}  // namespace ulab
