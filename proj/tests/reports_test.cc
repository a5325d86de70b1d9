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

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "ulab/errors.h"
#include "ulab/experiments.h"
#include "ulab/io.h"
#include "ulab/reports.h"

namespace ulab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

ExperimentConfig TinyConfig() {
  ExperimentConfig c;
  c.data.vocab = VocabSpec::Make(64, 16, 8);
  c.data.train_size = 200;
  c.data.aux_size = 400;
  c.data.holdout_size = 50;
  c.data.audit_size = 16;
  c.train.epochs = 30;
  c.audit.audit.num_audited = 8;
  c.audit.audit.shadows = 4;
  c.strict_mi.num_candidates = 8;
  c.relaxed_mi.num_targets = 8;
  c.relaxed_mi.mi.shadows = 8;
  c.relaxed_mi.mi.shadow_train_size = 200;
  c.dr.num_targets = 2;
  c.dr.recon.max_steps = 100;
  c.dr.recon.restarts = 2;
  c.repetitions = 2;
  c.master_seed = 11;
  return c;
}

ExperimentResults RunAll(const ExperimentConfig& c) {
  ExperimentResults r;
  r.config = c;
  r.audit = RunAuditCampaign(c, {});
  r.strict_mi = RunStrictMiCampaign(c, {});
  r.relaxed_mi = RunRelaxedMiCampaign(c, {});
  r.dr = RunDrCampaign(c, {});
  return r;
}

class ReportsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    results_ = RunAll(TinyConfig());
    bundle_ = EmitReports(results_);
  }

  static json Doc(std::string_view stem) {
    return json::parse(bundle_.files.at(std::string(stem) + ".json"));
  }

  static ExperimentResults results_;
  static ReportBundle bundle_;
};

ExperimentResults ReportsTest::results_;
ReportBundle ReportsTest::bundle_;

TEST(FormatCellTest, TwoDecimals) {
  EXPECT_EQ(FormatCell(0.125), "0.12");
  EXPECT_EQ(FormatCell(33.333333), "33.33");
  EXPECT_EQ(FormatCell(-0.001), "0.00");
  EXPECT_EQ(FormatCell(-1.5), "-1.50");
  EXPECT_EQ(FormatCell(std::nan("")), "nan");
}

TEST(EmitReportsTest, EmptyResultsGiveHeaderOnlyTables) {
  ExperimentResults empty;
  const ReportBundle b = EmitReports(empty);
  for (std::string_view stem :
       {kAuditReport, kStrictMiReport, kRelaxedMiReport, kDrReport}) {
    const std::string csv = b.files.at(std::string(stem) + ".csv");
    EXPECT_EQ(Lines(csv).size(), 1u) << stem;
    EXPECT_FALSE(b.files.contains(std::string(stem) + ".json"));
  }
  const json manifest = json::parse(b.files.at(std::string(kManifestFile)));
  EXPECT_TRUE(manifest.at("campaigns").empty());
  EXPECT_EQ(manifest.at("tool"), "ulab");
  EXPECT_FALSE(manifest.at("config").contains("threads"));
}

TEST(EmitReportsTest, AuditTableListsTheFiveMethods) {
  ExperimentResults empty;
  const ReportBundle b = EmitReports(empty);
  EXPECT_EQ(Lines(b.files.at("audit.csv"))[0],
            "mode,metric,Retrain,GA,KL,NPO,TaskVec");
}

TEST_F(ReportsTest, CampaignsAreRecorded) {
  const json manifest = json::parse(bundle_.files.at(std::string(kManifestFile)));
  EXPECT_EQ(manifest.at("campaigns").size(), 4u);
  EXPECT_EQ(manifest.at("seeds").size(), 2u);
  for (const auto& [name, _] : bundle_.files) {
    if (name != kManifestFile) {
      EXPECT_NE(std::find(manifest.at("files").begin(),
                          manifest.at("files").end(), name),
                manifest.at("files").end());
    }
  }
}

TEST_F(ReportsTest, SummaryIsMeanOfRuns) {
  const json audit = Doc(kAuditReport);
  for (const json& s : audit.at("summary")) {
    double auc = 0.0;
    int n = 0;
    for (const json& r : audit.at("runs")) {
      if (r.at("mode") == s.at("mode") && r.at("method") == s.at("method")) {
        auc += r.at("auc").get<double>();
        ++n;
      }
    }
    EXPECT_EQ(n, 2);
    EXPECT_NEAR(s.at("auc").get<double>(), auc / n, 1e-15);
  }
  const json dr = Doc(kDrReport);
  double r1 = 0.0;
  for (const json& t : dr.at("targets")) r1 += t.at("r1").get<double>();
  EXPECT_NEAR(dr.at("summary")[0].at("r1").get<double>(),
              r1 / dr.at("targets").size(), 1e-12);
}

TEST_F(ReportsTest, EveryCsvCellTracesToJson) {
  // Audit: rows are (mode, metric) and columns methods.
  const json audit = Doc(kAuditReport);
  const auto lines = Lines(bundle_.files.at("audit.csv"));
  const auto header = Cells(lines[0]);
  const std::size_t metrics = audit.at("fpr_grid").size() + 1;
  ASSERT_EQ(lines.size(), 1 + audit.at("modes").size() * metrics);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = Cells(lines[i]);
    const std::size_t metric = (i - 1) % metrics;
    for (std::size_t c = 2; c < row.size(); ++c) {
      const std::string method(UnlearnMethodName(
          results_.audit->methods[c - 2]));
      for (const json& s : audit.at("summary")) {
        if (s.at("mode") != row[0] || s.at("method") != method) continue;
        const double v = metric + 1 == metrics
                             ? s.at("auc").get<double>()
                             : s.at("tpr_at_fpr")[metric].get<double>();
        EXPECT_EQ(row[c], FormatCell(v));
      }
    }
  }
  // Strict MI: rows are score kinds.
  const json strict = Doc(kStrictMiReport);
  const auto slines = Lines(bundle_.files.at("mi_strict.csv"));
  ASSERT_EQ(slines.size(), 1 + strict.at("score_kinds").size());
  for (std::size_t i = 1; i < slines.size(); ++i) {
    const auto row = Cells(slines[i]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::string method(UnlearnMethodName(
          results_.strict_mi->methods[c - 1]));
      for (const json& s : strict.at("summary")) {
        if (s.at("score_kind") == row[0] && s.at("method") == method) {
          EXPECT_EQ(row[c], FormatCell(s.at("nts_at_1nfs").get<double>()));
        }
      }
    }
  }
  // Relaxed MI and DR: one row per summary entry, in order.
  const json relaxed = Doc(kRelaxedMiReport);
  const auto rlines = Lines(bundle_.files.at("mi_relaxed.csv"));
  ASSERT_EQ(rlines.size(), 1 + relaxed.at("summary").size());
  for (std::size_t i = 1; i < rlines.size(); ++i) {
    const json& s = relaxed.at("summary")[i - 1];
    const auto row = Cells(rlines[i]);
    EXPECT_EQ(row[1], FormatCell(s.at("tula_tpr").get<double>()));
    EXPECT_EQ(row[2], FormatCell(s.at("lira_tpr").get<double>()));
    EXPECT_EQ(row[3], FormatCell(s.at("tula_auc").get<double>()));
    EXPECT_EQ(row[4], FormatCell(s.at("lira_auc").get<double>()));
  }
  const json dr = Doc(kDrReport);
  const auto dlines = Lines(bundle_.files.at("dr.csv"));
  ASSERT_EQ(dlines.size(), 1 + dr.at("summary").size());
  const auto drow = Cells(dlines[1]);
  EXPECT_EQ(drow[0], "GA");
  EXPECT_EQ(drow[1], "synth");
  EXPECT_EQ(drow[2], FormatCell(dr.at("summary")[0].at("r1").get<double>()));
}

TEST_F(ReportsTest, RebuildFromDiskReproducesCsvs) {
  const fs::path dir = fs::temp_directory_path() / "ulab_reports_test";
  fs::remove_all(dir);
  WriteBundle(bundle_, dir);
  const ReportBundle rebuilt = RebuildCsvs(dir);
  EXPECT_EQ(rebuilt.files.size(), 4u);
  for (const auto& [name, contents] : rebuilt.files) {
    EXPECT_EQ(contents, bundle_.files.at(name)) << name;
    EXPECT_EQ(ReadFile(dir / name), contents);
  }
  fs::remove_all(dir);
  EXPECT_THROW(RebuildCsvs(dir), UsageError);
}

TEST_F(ReportsTest, ThreadCountDoesNotChangeTheBundle) {
  ExperimentConfig c = TinyConfig();
  c.threads = 4;
  c.out_dir = "elsewhere";
  const ReportBundle wide = EmitReports(RunAll(c));
  ASSERT_EQ(wide.files.size(), bundle_.files.size());
  for (const auto& [name, contents] : bundle_.files) {
    EXPECT_EQ(wide.files.at(name), contents) << name;
  }
}

}  // namespace
}  // namespace ulab
