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


#ifndef ULAB_REPORTS_H_
#define ULAB_REPORTS_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ulab/experiments.h"

namespace ulab {

// Report files keyed by path relative to the output directory. Contents are
// a pure function of the config and master seed: wall-clock times, the thread
// count and the output path live in a separate timing.json that is not part
// of the bundle.
struct ReportBundle {
  std::map<std::string, std::string> files;
};

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kTimingFile = "timing.json";

// Campaign names double as file stems: <name>.json and <name>.csv.
inline constexpr std::string_view kAuditReport = "audit";
inline constexpr std::string_view kStrictMiReport = "mi_strict";
inline constexpr std::string_view kRelaxedMiReport = "mi_relaxed";
inline constexpr std::string_view kDrReport = "dr";

// Raw per-run records plus a "summary" of means over repetitions, all at full
// precision.
nlohmann::json AuditJson(const AuditCampaignResult& result);
nlohmann::json StrictMiJson(const StrictMiCampaignResult& result);
nlohmann::json RelaxedMiJson(const RelaxedMiCampaignResult& result);
nlohmann::json DrJson(const DrCampaignResult& result);

// CSV tables rebuilt from the "summary" of the matching JSON document, with
// cells rounded to two decimals. A document with no summary rows gives a
// header-only table.
//   audit:      mode, metric, one column per method
//   mi_strict:  score, one column per method (mean NTS@1NFS)
//   mi_relaxed: one row per method
//   dr:         one row per method and dataset
std::string AuditCsv(const nlohmann::json& audit);
std::string StrictMiCsv(const nlohmann::json& strict);
std::string RelaxedMiCsv(const nlohmann::json& relaxed);
std::string DrCsv(const nlohmann::json& dr);

// Two-decimal rendering used by every CSV cell; "nan" for NaN.
std::string FormatCell(double value);

// JSON and CSV for every campaign present, header-only CSVs for the others,
// and manifest.json with the config, per-repetition seeds, failures and
// build versions.
ReportBundle EmitReports(const ExperimentResults& results);

// Writes every file atomically, the manifest last. Throws std::runtime_error
// on failure.
void WriteBundle(const ReportBundle& bundle,
                 const std::filesystem::path& out_dir);

// Regenerates the CSV tables from the JSON documents found in `out_dir`.
// Throws UsageError when the directory holds no manifest.
ReportBundle RebuildCsvs(const std::filesystem::path& out_dir);

// Wall-clock seconds per phase plus the thread count and output path,
// written outside the bundle.
void WriteTiming(const std::filesystem::path& out_dir,
                 const std::map<std::string, double>& seconds,
                 std::size_t threads);

}  // namespace ulab

#endif  // ULAB_REPORTS_H_
