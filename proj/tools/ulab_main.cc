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


// ulab: command-line front end for the unlearning audit and attack lab.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ulab/checkpoint.h"
#include "ulab/dataset_io.h"
#include "ulab/errors.h"
#include "ulab/experiment_config.h"
#include "ulab/experiments.h"
#include "ulab/reports.h"
#include "ulab/scheduler.h"
#include "ulab/synth.h"
#include "ulab/train.h"
#include "ulab/unlearn.h"

namespace fs = std::filesystem;

namespace ulab {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> threads;
  std::string out;
  std::string method;
  std::string data_dir;
  std::string model_path;
  std::string forget_path;
};

ExperimentConfig ResolveConfig(const CommonFlags& flags) {
  ExperimentConfig config = flags.config_path.empty()
                                ? ExperimentConfig()
                                : LoadExperimentConfig(flags.config_path);
  if (flags.seed) config.master_seed = *flags.seed;
  if (!flags.out.empty()) config.out_dir = flags.out;
  std::optional<long> threads = flags.threads;
  if (!threads && !flags.config_path.empty() && !std::getenv("ULAB_THREADS")) {
    threads = static_cast<long>(config.threads);
  }
  config.threads = ResolveThreads(threads);
  config.Validate();
  return config;
}

std::vector<UnlearnMethod> RequestedMethods(const CommonFlags& flags) {
  if (flags.method.empty() || flags.method == "all") return {};
  return {ParseUnlearnMethod(flags.method)};
}

fs::path DataDir(const CommonFlags& flags, const ExperimentConfig& config) {
  return flags.data_dir.empty() ? fs::path(config.out_dir)
                                : fs::path(flags.data_dir);
}

int GenData(const CommonFlags& flags) {
  const ExperimentConfig config = ResolveConfig(flags);
  const SeedPlan plan = DeriveSeedPlan(config.master_seed, 0);
  DataGenConfig data = config.data;
  data.seed = plan.data;
  const DataSplits splits = Generate(data);
  const fs::path out(config.out_dir);
  auto save = [&](const char* split, const Dataset& examples) {
    SaveDataset(out / (std::string(split) + ".jsonl"),
                {data.vocab, data.seed, split}, examples);
  };
  save("train", splits.train);
  save("audit", splits.audit);
  save("aux", splits.aux);
  save("holdout", splits.holdout);
  std::cout << "wrote " << splits.train.size() << "/" << splits.audit.size()
            << "/" << splits.aux.size() << "/" << splits.holdout.size()
            << " train/audit/aux/holdout examples to " << out.string() << "\n";
  return kExitOk;
}

int TrainCommand(const CommonFlags& flags) {
  const ExperimentConfig config = ResolveConfig(flags);
  const SeedPlan plan = DeriveSeedPlan(config.master_seed, 0);
  const DatasetFile train =
      LoadDataset(DataDir(flags, config) / "train.jsonl", &config.data.vocab);
  TrainConfig tc = config.train;
  tc.seed = plan.train;
  const ModelParams init = InitModel(config.data.vocab, plan.embedding);
  const ModelParams model = Train(tc, train.examples, init);
  const fs::path out(config.out_dir);
  SaveCheckpoint(out / "model.ckpt", model);
  SaveTrainSidecar(out / "model.train.json", tc);
  std::cout << "trained on " << train.examples.size() << " examples, "
            << "mean loss " << MeanLoss(model, train.examples) << "\n";
  return kExitOk;
}

int UnlearnCommand(const CommonFlags& flags) {
  const ExperimentConfig config = ResolveConfig(flags);
  if (flags.method.empty()) throw UsageError("unlearn needs --method");
  if (flags.forget_path.empty()) throw UsageError("unlearn needs --forget");
  const UnlearnMethod method = ParseUnlearnMethod(flags.method);
  const fs::path out(config.out_dir);
  const fs::path model_path =
      flags.model_path.empty() ? out / "model.ckpt" : fs::path(flags.model_path);
  const ModelParams original = LoadCheckpoint(model_path);
  const DatasetFile forget = LoadDataset(flags.forget_path, &original.spec);
  const DatasetFile train =
      LoadDataset(DataDir(flags, config) / "train.jsonl", &original.spec);
  Dataset remaining;
  for (const Example& ex : train.examples) {
    if (std::find(forget.examples.begin(), forget.examples.end(), ex) ==
        forget.examples.end()) {
      remaining.push_back(ex);
    }
  }
  fs::path sidecar = model_path;
  sidecar.replace_extension(".train.json");
  const TrainConfig tc = fs::exists(sidecar) ? LoadTrainSidecar(sidecar)
                                             : config.train;
  const SeedPlan plan = DeriveSeedPlan(config.master_seed, 0);
  const ModelParams init = InitModel(original.spec, plan.embedding);
  UnlearnConfig uc = config.UnlearnFor(method);
  uc.seed = plan.unlearn;
  const UnlearnResult r =
      Unlearn(uc, original, forget.examples, {remaining, &tc, &init});
  if (r.diverged) {
    throw NumericDivergenceError("unlearning diverged", r.steps_run);
  }
  const fs::path dest =
      out / ("unlearned-" + std::string(UnlearnMethodName(method)) + ".ckpt");
  SaveCheckpoint(dest, r.params);
  std::cout << "wrote " << dest.string() << "\n";
  return kExitOk;
}

// Runs one campaign and writes a full report bundle.
int CampaignCommand(const std::string& name, const CommonFlags& flags) {
  const ExperimentConfig config = ResolveConfig(flags);
  const std::vector<UnlearnMethod> methods = RequestedMethods(flags);
  ExperimentResults results;
  results.config = config;
  const auto start = std::chrono::steady_clock::now();
  std::string table;
  std::size_t failures = 0;
  if (name == "audit") {
    results.audit = RunAuditCampaign(config, methods);
    failures = results.audit->failures.size();
  } else if (name == "mi-strict") {
    results.strict_mi = RunStrictMiCampaign(config, methods);
    failures = results.strict_mi->failures.size();
  } else if (name == "mi-relaxed") {
    results.relaxed_mi = RunRelaxedMiCampaign(config, methods);
    failures = results.relaxed_mi->failures.size();
  } else {
    results.dr = RunDrCampaign(config, methods);
    failures = results.dr->failures.size();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const ReportBundle bundle = EmitReports(results);
  WriteBundle(bundle, config.out_dir);
  WriteTiming(config.out_dir, {{name, seconds}}, config.threads);
  const std::map<std::string, std::string_view> stems = {
      {"audit", kAuditReport},
      {"mi-strict", kStrictMiReport},
      {"mi-relaxed", kRelaxedMiReport},
      {"dr", kDrReport}};
  std::cout << bundle.files.at(std::string(stems.at(name)) + ".csv");
  if (failures > 0) {
    std::cerr << failures << " job failure(s); see manifest.json\n";
  }
  return kExitOk;
}

int ReportCommand(const CommonFlags& flags) {
  const fs::path out = flags.out.empty() ? fs::path("out") : fs::path(flags.out);
  const ReportBundle bundle = RebuildCsvs(out);
  WriteBundle(bundle, out);
  for (const auto& [name, contents] : bundle.files) {
    std::cout << "== " << name << "\n" << contents;
  }
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"ulab: audit and attack textual unlearning at desk scale"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "Experiment config (JSON)");
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--threads", flags.threads,
                    "Worker threads (default: ULAB_THREADS, else 1)");
    sub->add_option("--out", flags.out, "Output directory");
  };
  auto add_method = [&](CLI::App* sub) {
    sub->add_option("--method", flags.method,
                    "retrain, ga, kl, npo, taskvec or all");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Generate dataset splits");
  add_common(gen);
  CLI::App* train = app.add_subcommand("train", "Train on train.jsonl");
  add_common(train);
  train->add_option("--data", flags.data_dir, "Dataset directory");
  CLI::App* unlearn = app.add_subcommand("unlearn", "Unlearn a forget set");
  add_common(unlearn);
  add_method(unlearn);
  unlearn->add_option("--data", flags.data_dir, "Dataset directory");
  unlearn->add_option("--model", flags.model_path, "Checkpoint to unlearn");
  unlearn->add_option("--forget", flags.forget_path, "Forget set (JSON Lines)");
  std::map<CLI::App*, std::string> campaigns;
  for (const char* name : {"audit", "mi-strict", "mi-relaxed", "dr"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("Run the ") + name +
                                                 " campaign");
    add_common(sub);
    add_method(sub);
    campaigns[sub] = name;
  }
  CLI::App* report = app.add_subcommand("report", "Rebuild CSVs from JSON");
  report->add_option("--out", flags.out, "Report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return GenData(flags);
    if (train->parsed()) return TrainCommand(flags);
    if (unlearn->parsed()) return UnlearnCommand(flags);
    if (report->parsed()) return ReportCommand(flags);
    for (const auto& [sub, name] : campaigns) {
      if (sub->parsed()) return CampaignCommand(name, flags);
    }
  } catch (const NumericDivergenceError& e) {
    std::cerr << "ulab: numeric divergence: " << e.what() << "\n";
    return kExitFailure;
  } catch (const UsageError& e) {
    std::cerr << "ulab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "ulab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "ulab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputDomainError& e) {
    std::cerr << "ulab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "ulab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ulab: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace ulab

int main(int argc, char** argv) { return ulab::Main(argc, argv); }
