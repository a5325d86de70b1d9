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

// Drives the ulab binary end to end through the shell.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr
};

CliRun Ulab(const std::string& args) {
  const std::string cmd = std::string(ULAB_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ulab_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "config.json").string();
    std::ofstream(config_) << R"({
      "data": {"vocab": {"size": 64, "embed_dim": 16, "seq_len": 8},
               "train_size": 200, "aux_size": 400, "holdout_size": 50,
               "audit_size": 16},
      "train": {"epochs": 30},
      "audit": {"config": {"num_audited": 8, "shadows": 4}},
      "strict_mi": {"num_candidates": 8},
      "relaxed_mi": {"num_targets": 8,
                     "config": {"shadows": 8, "shadow_train_size": 200}},
      "dr": {"num_targets": 2, "recon": {"max_steps": 100, "restarts": 2}},
      "master_seed": 5
    })";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Out(const std::string& name) const {
    return (dir_ / name).string();
  }

  fs::path dir_;
  std::string config_;
};

TEST_F(CliTest, MissingConfigIsUsageErrorNamingThePath) {
  const CliRun r = Ulab("audit --config /no/such/ulab.json --out " + Out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/no/such/ulab.json"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandOrFlagIsUsageError) {
  EXPECT_EQ(Ulab("frobnicate").code, 2);
  EXPECT_EQ(Ulab("audit --bogus").code, 2);
  EXPECT_EQ(Ulab("").code, 2);
  EXPECT_EQ(Ulab("audit --config " + config_ + " --method sgd").code, 2);
}

TEST_F(CliTest, HelpExitsCleanly) { EXPECT_EQ(Ulab("--help").code, 0); }

TEST_F(CliTest, GenTrainUnlearnAuditPipeline) {
  const std::string out = Out("run");
  const std::string common = " --config " + config_ + " --out " + out;
  ASSERT_EQ(Ulab("gen-data" + common).code, 0);
  for (const char* split : {"train", "audit", "aux", "holdout"}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / (std::string(split) + ".jsonl")));
  }
  ASSERT_EQ(Ulab("train" + common).code, 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "model.ckpt"));

  // Forget the first training example.
  std::ifstream train(fs::path(out) / "train.jsonl");
  std::string header, first;
  std::getline(train, header);
  std::getline(train, first);
  std::ofstream(Out("forget.jsonl")) << header << "\n" << first << "\n";
  const CliRun u = Ulab("unlearn --method ga --forget " + Out("forget.jsonl") +
                     common);
  ASSERT_EQ(u.code, 0) << u.output;
  EXPECT_TRUE(fs::exists(fs::path(out) / "unlearned-ga.ckpt"));

  const CliRun a = Ulab("audit --method ga" + common);
  ASSERT_EQ(a.code, 0) << a.output;
  const auto audit =
      nlohmann::json::parse(Slurp(fs::path(out) / "audit.json"));
  EXPECT_EQ(audit.at("methods"), nlohmann::json::array({"ga"}));
  EXPECT_FALSE(audit.at("runs").empty());
  const auto manifest =
      nlohmann::json::parse(Slurp(fs::path(out) / "manifest.json"));
  EXPECT_EQ(manifest.at("campaigns"), nlohmann::json::array({"audit"}));
  EXPECT_NE(a.output.find("mode,metric,GA"), std::string::npos);
}

TEST_F(CliTest, BundlesMatchAcrossThreadCounts) {
  for (const char* cmd : {"audit", "mi-strict", "mi-relaxed", "dr"}) {
    const std::string common = std::string(cmd) + " --config " + config_;
    ASSERT_EQ(Ulab(common + " --threads 1 --out " + Out("t1")).code, 0);
    ASSERT_EQ(Ulab(common + " --threads 8 --out " + Out("t8")).code, 0);
    for (const auto& entry : fs::directory_iterator(Out("t1"))) {
      const std::string name = entry.path().filename().string();
      if (name == "timing.json") continue;
      EXPECT_EQ(Slurp(entry.path()), Slurp(fs::path(Out("t8")) / name))
          << cmd << " " << name;
    }
    const auto timing =
        nlohmann::json::parse(Slurp(fs::path(Out("t8")) / "timing.json"));
    EXPECT_EQ(timing.at("threads"), 8);
  }
}

TEST_F(CliTest, ReportRebuildsCsvs) {
  const std::string out = Out("rep");
  ASSERT_EQ(Ulab("mi-strict --config " + config_ + " --out " + out).code, 0);
  const std::string before = Slurp(fs::path(out) / "mi_strict.csv");
  fs::remove(fs::path(out) / "mi_strict.csv");
  ASSERT_EQ(Ulab("report --out " + out).code, 0);
  EXPECT_EQ(Slurp(fs::path(out) / "mi_strict.csv"), before);
  EXPECT_EQ(Ulab("report --out " + Out("empty")).code, 2);
}

TEST_F(CliTest, SeedFlagChangesResults) {
  ASSERT_EQ(Ulab("mi-strict --config " + config_ + " --out " + Out("a")).code,
            0);
  ASSERT_EQ(Ulab("mi-strict --seed 99 --config " + config_ + " --out " +
                 Out("b"))
                .code,
            0);
  EXPECT_NE(Slurp(fs::path(Out("a")) / "mi_strict.json"),
            Slurp(fs::path(Out("b")) / "mi_strict.json"));
}

}  // namespace
